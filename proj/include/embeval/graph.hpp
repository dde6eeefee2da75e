#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "embeval/common.hpp"

namespace embeval {

/// External (string) node id <-> dense integer id, in first-seen order.
class IdMap {
public:
    uint32_t add(std::string_view name);
    std::optional<uint32_t> find(std::string_view name) const;
    const std::string& name(uint32_t id) const { return names_[id]; }
    uint32_t size() const { return static_cast<uint32_t>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }

private:
    struct StringHash {
        using is_transparent = void;
        size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
    };
    std::vector<std::string> names_;
    std::unordered_map<std::string, uint32_t, StringHash, std::equal_to<>> index_;
};

/// Immutable undirected graph in CSR form. Dense ids are 0..num_nodes()-1,
/// adjacency is symmetric, deduplicated, self-loop free, neighbor lists sorted.
/// Safe for concurrent reads.
class Graph {
public:
    Graph() = default;

    /// Builds from an arbitrary pair list: symmetrizes, drops self-loops
    /// (counted in self_loops_dropped), deduplicates. An empty id_map gets
    /// decimal names so ids() always covers 0..num_nodes-1; a non-empty one
    /// must already have exactly num_nodes entries.
    static Graph from_edges(uint32_t num_nodes, std::span<const std::pair<uint32_t, uint32_t>> edges,
                            IdMap id_map = {});

    uint32_t num_nodes() const { return num_nodes_; }
    uint64_t num_edges() const { return num_edges_; }  // undirected, deduplicated
    uint32_t degree(uint32_t v) const {
        return static_cast<uint32_t>(offsets_[v + 1] - offsets_[v]);
    }
    std::span<const uint32_t> neighbors(uint32_t v) const {
        return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
    }
    bool has_edge(uint32_t u, uint32_t v) const;

    const IdMap& ids() const { return id_map_; }

    uint64_t self_loops_dropped() const { return self_loops_dropped_; }

private:
    uint32_t num_nodes_ = 0;
    uint64_t num_edges_ = 0;
    std::vector<uint64_t> offsets_;   // size num_nodes_+1
    std::vector<uint32_t> adjacency_; // size 2*num_edges_, sorted per node
    IdMap id_map_;
    uint64_t self_loops_dropped_ = 0;
};

struct GraphStats {
    uint64_t num_nodes = 0;
    uint64_t num_edges = 0;
    double density = 0.0;  // 2E / (N(N-1)), 0 for N < 2
    uint64_t num_components = 0;
};

/// Parses whitespace-separated "u v" lines; '#' lines are comments; ids are
/// arbitrary tokens mapped in first-seen order. Throws ParseError with the
/// line number on malformed lines. An empty stream yields an empty graph.
Graph load_edge_list(std::istream& in);
Graph load_edge_list_file(const std::string& path);

/// One "u v" line per edge, dense-id order, external names. Reloading the
/// output reproduces the identical adjacency structure and id map.
void write_edge_list(const Graph& graph, std::ostream& out);

GraphStats graph_stats(const Graph& graph);

/// Uniform sample of `count` distinct non-adjacent unordered pairs (u != v).
/// Throws DataError when count exceeds the number of non-edges.
std::vector<std::pair<uint32_t, uint32_t>> sample_non_edges(const Graph& graph, uint64_t count,
                                                            uint64_t seed);

}  // namespace embeval
