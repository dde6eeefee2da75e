#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "embeval/grouping.hpp"
#include "embeval/sgns.hpp"

namespace embeval {

/// Node ids of the k largest values in one embedding dimension, ordered by
/// (value descending, id ascending); ties always resolve toward the lower id.
std::vector<uint32_t> top_k_nodes(std::span<const float> values, uint32_t k);
/// Smallest k, ordered by (value ascending, id ascending).
std::vector<uint32_t> bottom_k_nodes(std::span<const float> values, uint32_t k);

/// Per-(dimension, group) interpretability scores, both directions:
///   score_top(d, l) = |C_l intersect top_k(dim d)| / |C_l| * 100
/// with k = |C_l| unless a fixed k overrides it. Groups with no members are
/// skipped (entries 0, recorded in skipped_groups).
struct ISMatrix {
    uint32_t num_dims = 0;
    uint32_t num_groups = 0;
    std::vector<double> top;     // num_dims * num_groups, row-major [d][l]
    std::vector<double> bottom;  // same layout
    std::vector<uint32_t> skipped_groups;

    double at_top(uint32_t d, uint32_t l) const { return top[size_t(d) * num_groups + l]; }
    double at_bottom(uint32_t d, uint32_t l) const { return bottom[size_t(d) * num_groups + l]; }
};

/// Embedding rows are the node ids the grouping refers to, so the grouping
/// must cover exactly rows 0..rows-1. fixed_k = 0 means k tracks each
/// group's cardinality; otherwise k = min(fixed_k, rows).
ISMatrix is_scores(const EmbeddingMatrix& emb, const NodeGrouping& grouping, uint32_t fixed_k = 0);

enum class Agg { max, mean };

struct ISConfig {
    Agg combine_directions = Agg::max;  // top vs bottom, per cell
    Agg sweep = Agg::max;               // collapse over groups / dims
};

/// Direction-combined summaries. per_dim[d] sweeps groups (how interpretable
/// dimension d is under its best/average group); per_group[l] sweeps
/// dimensions; overall applies the sweep to per_dim. Skipped groups are
/// excluded from every sweep and report 0 in per_group.
struct ISAggregate {
    std::vector<double> per_dim;
    std::vector<double> per_group;
    double overall = 0.0;
};

ISAggregate aggregate(const ISMatrix& matrix, const ISConfig& config = {});

/// CSV `dimension,group,direction,score`, direction in {top, bottom}, scores
/// printed with full precision; skipped groups are omitted.
void export_is_heatmap(const ISMatrix& matrix, std::span<const std::string> group_names,
                       std::ostream& out);
void export_is_heatmap_file(const ISMatrix& matrix, std::span<const std::string> group_names,
                            const std::string& path);

}  // namespace embeval
