#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "embeval/graph.hpp"

namespace embeval {

/// Newman modularity of a node partition, with a resolution knob:
///   Q = sum_c [ e_c/m - res * (d_c / 2m)^2 ].
/// Throws DataError when the graph has no edges (m = 0 is undefined here);
/// louvain() below instead adopts the singleton/Q=0 convention for that case.
double modularity(const Graph& graph, std::span<const uint32_t> communities,
                  double resolution = 1.0);

struct LouvainOptions {
    double resolution = 1.0;
    uint64_t seed = 1;
    double min_gain = 1e-9;  // smallest modularity improvement worth a move
    uint32_t restarts = 5;   // seeded attempts; the best-modularity one wins
};

struct ClusteringResult {
    std::vector<uint32_t> assignment;  // node -> community, dense 0..K-1
    uint32_t num_communities = 0;
    double modularity = 0.0;  // recomputed on the input graph
    uint32_t levels = 0;      // aggregation rounds performed
};

/// Two-phase Louvain: greedy local moves (node order shuffled once per level
/// from the seed, gain ties broken toward the lowest community id), then
/// community aggregation, repeated until no move improves Q. The result is
/// order-dependent, so `restarts` independent attempts run with derived seeds
/// and the highest-modularity partition wins (earliest attempt on ties);
/// everything stays deterministic in `seed`. Community ids in the result are
/// renumbered by first occurrence over ascending node id. An edgeless graph
/// yields singleton communities with modularity 0.
ClusteringResult louvain(const Graph& graph, const LouvainOptions& options = {});

/// CSV `node,community` with header; nodes in ascending dense id order.
void write_communities(std::span<const uint32_t> assignment, const IdMap& ids, std::ostream& out);
void write_communities_file(std::span<const uint32_t> assignment, const IdMap& ids,
                            const std::string& path);

struct CommunitiesLoad {
    std::vector<uint32_t> assignment;
    uint32_t num_communities = 0;
    IdMap ids;  // row order of the file
};
CommunitiesLoad read_communities(std::istream& in);
CommunitiesLoad read_communities_file(const std::string& path);

}  // namespace embeval
