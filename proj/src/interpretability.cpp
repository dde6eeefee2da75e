#include "embeval/interpretability.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

#include "embeval/common.hpp"

namespace embeval {

namespace {

std::vector<uint32_t> sorted_ids(std::span<const float> values, bool descending) {
    std::vector<uint32_t> ids(values.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::stable_sort(ids.begin(), ids.end(), [&](uint32_t a, uint32_t b) {
        if (values[a] != values[b]) return descending ? values[a] > values[b] : values[a] < values[b];
        return a < b;
    });
    return ids;
}

}  // namespace

std::vector<uint32_t> top_k_nodes(std::span<const float> values, uint32_t k) {
    auto ids = sorted_ids(values, true);
    ids.resize(std::min<size_t>(k, ids.size()));
    return ids;
}

std::vector<uint32_t> bottom_k_nodes(std::span<const float> values, uint32_t k) {
    auto ids = sorted_ids(values, false);
    ids.resize(std::min<size_t>(k, ids.size()));
    return ids;
}

ISMatrix is_scores(const EmbeddingMatrix& emb_in, const NodeGrouping& grouping, uint32_t fixed_k) {
    EmbeddingMatrix reordered;
    const EmbeddingMatrix& emb = canonical_rows(emb_in, reordered);
    if (grouping.num_nodes != emb.rows)
        throw DataError("grouping covers " + std::to_string(grouping.num_nodes) +
                        " nodes but embedding has " + std::to_string(emb.rows) + " rows");
    for (const auto& members : grouping.members)
        for (uint32_t v : members)
            if (v >= emb.rows) throw DataError("group member id out of embedding range");

    const uint32_t n = emb.rows;
    ISMatrix m;
    m.num_dims = emb.dim;
    m.num_groups = grouping.num_groups;
    m.top.assign(size_t(m.num_dims) * m.num_groups, 0.0);
    m.bottom.assign(size_t(m.num_dims) * m.num_groups, 0.0);
    for (uint32_t l = 0; l < grouping.num_groups; ++l)
        if (grouping.members[l].empty()) m.skipped_groups.push_back(l);

    // One column scan per dimension: rank each node in both orders, then a
    // group's score is just how many members rank inside the first k.
    std::vector<float> column(n);
    std::vector<uint32_t> rank_top(n), rank_bottom(n);
    for (uint32_t d = 0; d < emb.dim; ++d) {
        for (uint32_t v = 0; v < n; ++v) column[v] = emb.row(v)[d];
        auto by_desc = sorted_ids(column, true);
        auto by_asc = sorted_ids(column, false);
        for (uint32_t r = 0; r < n; ++r) {
            rank_top[by_desc[r]] = r;
            rank_bottom[by_asc[r]] = r;
        }

        for (uint32_t l = 0; l < grouping.num_groups; ++l) {
            const auto& members = grouping.members[l];
            if (members.empty()) continue;
            uint32_t k = fixed_k == 0 ? static_cast<uint32_t>(members.size())
                                      : std::min<uint32_t>(fixed_k, n);
            uint32_t hit_top = 0, hit_bottom = 0;
            for (uint32_t v : members) {
                if (rank_top[v] < k) ++hit_top;
                if (rank_bottom[v] < k) ++hit_bottom;
            }
            double denom = static_cast<double>(members.size());
            m.top[size_t(d) * m.num_groups + l] = 100.0 * hit_top / denom;
            m.bottom[size_t(d) * m.num_groups + l] = 100.0 * hit_bottom / denom;
        }
    }
    return m;
}

namespace {

double combine(double a, double b, Agg agg) {
    return agg == Agg::max ? std::max(a, b) : (a + b) / 2.0;
}

}  // namespace

ISAggregate aggregate(const ISMatrix& matrix, const ISConfig& config) {
    std::vector<bool> skipped(matrix.num_groups, false);
    for (uint32_t l : matrix.skipped_groups) skipped[l] = true;
    uint32_t live_groups = 0;
    for (uint32_t l = 0; l < matrix.num_groups; ++l)
        if (!skipped[l]) ++live_groups;

    ISAggregate agg;
    agg.per_dim.assign(matrix.num_dims, 0.0);
    agg.per_group.assign(matrix.num_groups, 0.0);
    if (live_groups == 0 || matrix.num_dims == 0) return agg;

    std::vector<double> group_acc(matrix.num_groups, 0.0);
    for (uint32_t d = 0; d < matrix.num_dims; ++d) {
        double dim_best = 0.0, dim_sum = 0.0;
        for (uint32_t l = 0; l < matrix.num_groups; ++l) {
            if (skipped[l]) continue;
            double cell = combine(matrix.at_top(d, l), matrix.at_bottom(d, l),
                                  config.combine_directions);
            dim_best = std::max(dim_best, cell);
            dim_sum += cell;
            if (config.sweep == Agg::max)
                group_acc[l] = std::max(group_acc[l], cell);
            else
                group_acc[l] += cell;
        }
        agg.per_dim[d] = config.sweep == Agg::max ? dim_best : dim_sum / live_groups;
    }
    for (uint32_t l = 0; l < matrix.num_groups; ++l) {
        if (skipped[l]) continue;
        agg.per_group[l] =
            config.sweep == Agg::max ? group_acc[l] : group_acc[l] / matrix.num_dims;
    }

    if (config.sweep == Agg::max) {
        for (double v : agg.per_dim) agg.overall = std::max(agg.overall, v);
    } else {
        double s = 0;
        for (double v : agg.per_dim) s += v;
        agg.overall = s / matrix.num_dims;
    }
    return agg;
}

void export_is_heatmap(const ISMatrix& matrix, std::span<const std::string> group_names,
                       std::ostream& out) {
    if (group_names.size() != matrix.num_groups)
        throw DataError("group name count does not match score matrix");
    std::vector<bool> skipped(matrix.num_groups, false);
    for (uint32_t l : matrix.skipped_groups) skipped[l] = true;

    out << "dimension,group,direction,score\n";
    char num[64];
    for (uint32_t d = 0; d < matrix.num_dims; ++d) {
        for (uint32_t l = 0; l < matrix.num_groups; ++l) {
            if (skipped[l]) continue;
            std::snprintf(num, sizeof num, "%.17g", matrix.at_top(d, l));
            out << d << ',' << group_names[l] << ",top," << num << '\n';
            std::snprintf(num, sizeof num, "%.17g", matrix.at_bottom(d, l));
            out << d << ',' << group_names[l] << ",bottom," << num << '\n';
        }
    }
}

void export_is_heatmap_file(const ISMatrix& matrix, std::span<const std::string> group_names,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write heatmap file: " + path);
    export_is_heatmap(matrix, group_names, out);
    if (!out) throw DataError("short write on heatmap file: " + path);
}

}  // namespace embeval
