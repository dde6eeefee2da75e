#include "embeval/grouping.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

namespace embeval {

bool NodeGrouping::same_group(uint32_t u, uint32_t v) const {
    if (kind == GroupingKind::partition) return partition[u] == partition[v];
    const auto& a = memberships[u];
    const auto& b = memberships[v];
    size_t i = 0, j = 0;  // both sorted
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return true;
        if (a[i] < b[j])
            ++i;
        else
            ++j;
    }
    return false;
}

std::span<const uint32_t> NodeGrouping::groups_of(uint32_t v) const {
    if (kind == GroupingKind::partition) return {&partition[v], 1};
    return memberships[v];
}

NodeGrouping make_partition(std::vector<uint32_t> labels, uint32_t num_groups) {
    NodeGrouping g;
    g.kind = GroupingKind::partition;
    g.num_nodes = static_cast<uint32_t>(labels.size());
    g.num_groups = num_groups;
    g.partition = std::move(labels);
    g.group_sizes.assign(num_groups, 0);
    g.members.assign(num_groups, {});
    for (uint32_t v = 0; v < g.num_nodes; ++v) {
        uint32_t c = g.partition[v];
        ++g.group_sizes[c];
        g.members[c].push_back(v);
    }
    g.group_names.resize(num_groups);
    for (uint32_t c = 0; c < num_groups; ++c) g.group_names[c] = std::to_string(c);
    return g;
}

NodeGrouping load_labels(std::istream& in, const IdMap& ids, uint32_t num_nodes) {
    NodeGrouping g;
    g.kind = GroupingKind::multilabel;
    g.num_nodes = num_nodes;
    g.memberships.assign(num_nodes, {});

    IdMap group_ids;
    std::vector<std::string> unknown;
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos || tab + 1 >= line.size()) {
            throw ParseError("expected 'node<TAB>group,group,...', got '" + line + "'", line_no);
        }
        std::string node_name = line.substr(0, tab);
        std::string group_list = line.substr(tab + 1);

        auto node = ids.find(node_name);
        if (!node) {
            unknown.push_back(node_name);
            continue;
        }

        size_t pos = 0;
        bool any = false;
        while (pos <= group_list.size()) {
            size_t comma = group_list.find(',', pos);
            std::string tok = group_list.substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (tok.empty()) throw ParseError("empty group token in '" + line + "'", line_no);
            g.memberships[*node].push_back(group_ids.add(tok));
            any = true;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (!any) throw ParseError("empty group list in '" + line + "'", line_no);
    }
    if (!unknown.empty()) {
        std::string msg = "label file references unknown node ids:";
        size_t shown = std::min<size_t>(unknown.size(), 10);
        for (size_t i = 0; i < shown; ++i) msg += " " + unknown[i];
        if (unknown.size() > shown)
            msg += " (+" + std::to_string(unknown.size() - shown) + " more)";
        throw DataError(msg);
    }

    g.num_groups = group_ids.size();
    g.group_names.assign(group_ids.names().begin(), group_ids.names().end());
    g.group_sizes.assign(g.num_groups, 0);
    g.members.assign(g.num_groups, {});
    for (uint32_t v = 0; v < num_nodes; ++v) {
        auto& m = g.memberships[v];
        std::sort(m.begin(), m.end());
        m.erase(std::unique(m.begin(), m.end()), m.end());  // "2,2" counts once
        for (uint32_t c : m) {
            ++g.group_sizes[c];
            g.members[c].push_back(v);
        }
    }
    return g;
}

NodeGrouping load_labels(std::istream& in, const Graph& graph) {
    return load_labels(in, graph.ids(), graph.num_nodes());
}

NodeGrouping load_labels_file(const std::string& path, const Graph& graph) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open label file: " + path);
    return load_labels(in, graph);
}

}  // namespace embeval
