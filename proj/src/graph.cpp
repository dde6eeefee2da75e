#include "embeval/graph.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace embeval {

uint32_t IdMap::add(std::string_view name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(names_.size());
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return id;
}

std::optional<uint32_t> IdMap::find(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Graph Graph::from_edges(uint32_t num_nodes, std::span<const std::pair<uint32_t, uint32_t>> edges,
                        IdMap id_map) {
    Graph g;
    g.num_nodes_ = num_nodes;
    g.id_map_ = std::move(id_map);
    if (g.id_map_.size() == 0) {
        // Keep ids() usable for graphs built directly from dense pairs.
        for (uint32_t v = 0; v < num_nodes; ++v) g.id_map_.add(std::to_string(v));
    }
    if (g.id_map_.size() != num_nodes)
        throw DataError("id map size does not match node count");

    std::vector<std::pair<uint32_t, uint32_t>> canon;
    canon.reserve(edges.size());
    for (auto [u, v] : edges) {
        if (u == v) {
            ++g.self_loops_dropped_;
            continue;
        }
        canon.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(canon.begin(), canon.end());
    canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
    g.num_edges_ = canon.size();

    std::vector<uint64_t> deg(num_nodes + 1, 0);
    for (auto [u, v] : canon) {
        ++deg[u + 1];
        ++deg[v + 1];
    }
    g.offsets_.assign(num_nodes + 1, 0);
    for (uint32_t i = 0; i < num_nodes; ++i) g.offsets_[i + 1] = g.offsets_[i] + deg[i + 1];

    g.adjacency_.resize(2 * g.num_edges_);
    std::vector<uint64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [u, v] : canon) {
        g.adjacency_[cursor[u]++] = v;
        g.adjacency_[cursor[v]++] = u;
    }
    // canon is sorted by (min,max); the v->u entries land unsorted, fix per node.
    for (uint32_t v = 0; v < num_nodes; ++v) {
        std::sort(g.adjacency_.begin() + static_cast<ptrdiff_t>(g.offsets_[v]),
                  g.adjacency_.begin() + static_cast<ptrdiff_t>(g.offsets_[v + 1]));
    }
    return g;
}

bool Graph::has_edge(uint32_t u, uint32_t v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

Graph load_edge_list(std::istream& in) {
    IdMap ids;
    std::vector<std::pair<uint32_t, uint32_t>> edges;
    std::string line;
    uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;  // blank
        if (line[first] == '#') continue;          // comment

        std::istringstream ls(line);
        std::string a, b, extra;
        ls >> a >> b;
        if (b.empty() || (ls >> extra)) {
            throw ParseError("expected two whitespace-separated node ids, got '" + line + "'",
                             line_no);
        }
        // Two statements: argument evaluation order must not decide which
        // endpoint gets the earlier first-seen id.
        uint32_t ua = ids.add(a);
        uint32_t ub = ids.add(b);
        edges.emplace_back(ua, ub);
    }
    uint32_t n = ids.size();
    return Graph::from_edges(n, edges, std::move(ids));
}

Graph load_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open edge list file: " + path);
    return load_edge_list(in);
}

void write_edge_list(const Graph& graph, std::ostream& out) {
    const bool named = graph.ids().size() == graph.num_nodes();
    for (uint32_t u = 0; u < graph.num_nodes(); ++u) {
        for (uint32_t v : graph.neighbors(u)) {
            if (v <= u) continue;
            if (named)
                out << graph.ids().name(u) << ' ' << graph.ids().name(v) << '\n';
            else
                out << u << ' ' << v << '\n';
        }
    }
}

GraphStats graph_stats(const Graph& graph) {
    GraphStats s;
    s.num_nodes = graph.num_nodes();
    s.num_edges = graph.num_edges();
    if (s.num_nodes >= 2) {
        s.density = 2.0 * static_cast<double>(s.num_edges) /
                    (static_cast<double>(s.num_nodes) * static_cast<double>(s.num_nodes - 1));
    }
    // components by BFS
    std::vector<uint32_t> stack;
    std::vector<bool> seen(graph.num_nodes(), false);
    for (uint32_t start = 0; start < graph.num_nodes(); ++start) {
        if (seen[start]) continue;
        ++s.num_components;
        seen[start] = true;
        stack.push_back(start);
        while (!stack.empty()) {
            uint32_t u = stack.back();
            stack.pop_back();
            for (uint32_t v : graph.neighbors(u)) {
                if (!seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
    }
    return s;
}

std::vector<std::pair<uint32_t, uint32_t>> sample_non_edges(const Graph& graph, uint64_t count,
                                                            uint64_t seed) {
    const uint64_t n = graph.num_nodes();
    const uint64_t total_pairs = n < 2 ? 0 : n * (n - 1) / 2;
    const uint64_t total_non_edges = total_pairs - graph.num_edges();
    if (count > total_non_edges) {
        throw DataError("requested " + std::to_string(count) + " non-edges but only " +
                        std::to_string(total_non_edges) + " exist");
    }
    std::vector<std::pair<uint32_t, uint32_t>> result;
    if (count == 0) return result;
    result.reserve(count);
    uint64_t rng_state = mix_seed(seed, fnv1a64("non-edges"));

    // Dense or near-exhaustive request: enumerate and subsample without replacement.
    if (total_non_edges <= (1u << 20) || count * 2 > total_non_edges) {
        std::vector<std::pair<uint32_t, uint32_t>> all;
        all.reserve(total_non_edges);
        for (uint32_t u = 0; u < n; ++u) {
            auto nb = graph.neighbors(u);
            size_t i = 0;
            for (uint32_t v = u + 1; v < n; ++v) {
                while (i < nb.size() && nb[i] < v) ++i;
                if (i < nb.size() && nb[i] == v) continue;
                all.emplace_back(u, v);
            }
        }
        // partial Fisher-Yates
        for (uint64_t k = 0; k < count; ++k) {
            uint64_t j = k + splitmix64_next(rng_state) % (all.size() - k);
            std::swap(all[k], all[j]);
            result.push_back(all[k]);
        }
        return result;
    }

    std::unordered_set<uint64_t> taken;
    taken.reserve(count * 2);
    while (result.size() < count) {
        uint32_t u = static_cast<uint32_t>(splitmix64_next(rng_state) % n);
        uint32_t v = static_cast<uint32_t>(splitmix64_next(rng_state) % n);
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        if (graph.has_edge(u, v)) continue;
        uint64_t key = (static_cast<uint64_t>(u) << 32) | v;
        if (!taken.insert(key).second) continue;
        result.emplace_back(u, v);
    }
    return result;
}

}  // namespace embeval
