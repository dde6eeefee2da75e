#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "embeval/graph.hpp"

namespace embeval {

enum class GroupingKind { partition, multilabel };

/// Partition or multi-label assignment of nodes into L groups.
/// Group ids are dense 0..L-1; `group_names` keeps the external tokens.
struct NodeGrouping {
    GroupingKind kind = GroupingKind::partition;
    uint32_t num_nodes = 0;
    uint32_t num_groups = 0;  // L

    // partition: one group per node. multilabel: sorted unique group ids per
    // node, possibly empty.
    std::vector<uint32_t> partition;
    std::vector<std::vector<uint32_t>> memberships;

    std::vector<std::string> group_names;          // size L
    std::vector<uint32_t> group_sizes;             // |C_l|
    std::vector<std::vector<uint32_t>> members;    // C_l as sorted node lists

    bool same_group(uint32_t u, uint32_t v) const;
    std::span<const uint32_t> groups_of(uint32_t v) const;
};

/// Builds a partition grouping from one dense label per node.
NodeGrouping make_partition(std::vector<uint32_t> labels, uint32_t num_groups);

/// Parses `node<TAB>group,group,...` lines into a multilabel grouping over
/// the graph's nodes. Nodes absent from the stream keep empty label sets.
/// Unknown node ids raise DataError listing the offenders; a present line
/// with an empty group list raises ParseError.
NodeGrouping load_labels(std::istream& in, const Graph& graph);
NodeGrouping load_labels(std::istream& in, const IdMap& ids, uint32_t num_nodes);
NodeGrouping load_labels_file(const std::string& path, const Graph& graph);

}  // namespace embeval
