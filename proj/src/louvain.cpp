#include "embeval/louvain.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "embeval/common.hpp"

namespace embeval {

double modularity(const Graph& graph, std::span<const uint32_t> communities, double resolution) {
    if (communities.size() != graph.num_nodes())
        throw DataError("community assignment size does not match node count");
    if (graph.num_edges() == 0)
        throw DataError("modularity is undefined on an edgeless graph");

    uint32_t k = 0;
    for (uint32_t c : communities) k = std::max(k, c + 1);
    std::vector<double> internal(k, 0.0), degree(k, 0.0);
    for (uint32_t u = 0; u < graph.num_nodes(); ++u) {
        degree[communities[u]] += static_cast<double>(graph.degree(u));
        for (uint32_t v : graph.neighbors(u))
            if (u < v && communities[u] == communities[v]) internal[communities[u]] += 1.0;
    }

    double m = static_cast<double>(graph.num_edges());
    double q = 0.0;
    for (uint32_t c = 0; c < k; ++c) {
        double frac = degree[c] / (2.0 * m);
        q += internal[c] / m - resolution * frac * frac;
    }
    return q;
}

namespace {

// Aggregated graphs are weighted and can carry self-loops, which the public
// Graph type deliberately cannot, so levels use this private CSR.
struct LevelGraph {
    std::vector<uint64_t> offsets;
    std::vector<uint32_t> adj;
    std::vector<double> weight;       // parallel to adj
    std::vector<double> self_weight;  // per node, counted once
    uint32_t n = 0;

    static LevelGraph from(const Graph& g) {
        LevelGraph lg;
        lg.n = g.num_nodes();
        lg.offsets.resize(lg.n + 1);
        lg.self_weight.assign(lg.n, 0.0);
        lg.adj.reserve(2 * g.num_edges());
        lg.offsets[0] = 0;
        for (uint32_t u = 0; u < lg.n; ++u) {
            auto nb = g.neighbors(u);
            lg.adj.insert(lg.adj.end(), nb.begin(), nb.end());
            lg.offsets[u + 1] = lg.adj.size();
        }
        lg.weight.assign(lg.adj.size(), 1.0);
        return lg;
    }

    std::span<const uint32_t> neighbors(uint32_t u) const {
        return {adj.data() + offsets[u], adj.data() + offsets[u + 1]};
    }
    std::span<const double> weights(uint32_t u) const {
        return {weight.data() + offsets[u], weight.data() + offsets[u + 1]};
    }
};

struct LocalMoveResult {
    std::vector<uint32_t> assignment;  // dense 0..K-1
    uint32_t num_communities = 0;
    bool moved_any = false;
};

// Greedy modularity moves until a full pass changes nothing. Node order is
// shuffled once from the seed and reused across passes.
LocalMoveResult local_move(const LevelGraph& g, double resolution, double min_gain,
                           uint64_t seed) {
    const uint32_t n = g.n;
    std::vector<double> k(n, 0.0);  // weighted degree, self-loops twice
    double m2 = 0.0;                // 2m
    for (uint32_t u = 0; u < n; ++u) {
        k[u] = 2.0 * g.self_weight[u];
        for (double w : g.weights(u)) k[u] += w;
        m2 += k[u];
    }

    std::vector<uint32_t> comm(n);
    std::iota(comm.begin(), comm.end(), 0);
    std::vector<double> comm_tot = k;  // sum of k over community members

    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    seeded_shuffle(order, mix_seed(seed, fnv1a64("local-move")));

    // Scratch accumulator of edge weight from u into each touched community.
    std::vector<double> w_to(n, 0.0);
    std::vector<uint32_t> touched;

    LocalMoveResult res;
    bool improved = true;
    while (improved) {
        improved = false;
        for (uint32_t u : order) {
            uint32_t cu = comm[u];
            touched.clear();
            auto nb = g.neighbors(u);
            auto wt = g.weights(u);
            for (size_t i = 0; i < nb.size(); ++i) {
                uint32_t c = comm[nb[i]];
                if (w_to[c] == 0.0) touched.push_back(c);
                w_to[c] += wt[i];
            }

            comm_tot[cu] -= k[u];
            auto move_gain = [&](uint32_t c) {
                return 2.0 * w_to[c] / m2 -
                       2.0 * resolution * comm_tot[c] * k[u] / (m2 * m2);
            };
            // A move must beat staying put by more than min_gain; among
            // near-equal improving candidates the lowest community id wins.
            double best_gain = move_gain(cu);
            uint32_t best = cu;
            for (uint32_t c : touched) {
                if (c == cu) continue;
                double gain = move_gain(c);
                if (gain > best_gain + min_gain) {
                    best_gain = gain;
                    best = c;
                } else if (best != cu && gain > best_gain - min_gain && c < best) {
                    best_gain = std::max(best_gain, gain);
                    best = c;
                }
            }
            comm_tot[best] += k[u];
            if (best != cu) {
                comm[u] = best;
                improved = true;
                res.moved_any = true;
            }
            for (uint32_t c : touched) w_to[c] = 0.0;
        }
    }

    // Renumber to dense ids by first occurrence over ascending node id.
    std::vector<uint32_t> remap(n, UINT32_MAX);
    uint32_t next = 0;
    res.assignment.resize(n);
    for (uint32_t u = 0; u < n; ++u) {
        if (remap[comm[u]] == UINT32_MAX) remap[comm[u]] = next++;
        res.assignment[u] = remap[comm[u]];
    }
    res.num_communities = next;
    return res;
}

LevelGraph aggregate(const LevelGraph& g, std::span<const uint32_t> comm, uint32_t k) {
    // Pass 1: collect each community's outgoing (community, weight) pairs.
    std::vector<std::vector<std::pair<uint32_t, double>>> out(k);
    LevelGraph agg;
    agg.n = k;
    agg.self_weight.assign(k, 0.0);
    for (uint32_t u = 0; u < g.n; ++u) {
        uint32_t cu = comm[u];
        agg.self_weight[cu] += g.self_weight[u];
        auto nb = g.neighbors(u);
        auto wt = g.weights(u);
        for (size_t i = 0; i < nb.size(); ++i) {
            uint32_t cv = comm[nb[i]];
            if (cv == cu) {
                // Each internal edge appears from both endpoints; halve it.
                agg.self_weight[cu] += wt[i] / 2.0;
            } else {
                out[cu].emplace_back(cv, wt[i]);
            }
        }
    }

    agg.offsets.resize(k + 1);
    agg.offsets[0] = 0;
    for (uint32_t c = 0; c < k; ++c) {
        auto& row = out[c];
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        size_t i = 0;
        while (i < row.size()) {
            uint32_t cv = row[i].first;
            double w = 0;
            while (i < row.size() && row[i].first == cv) w += row[i++].second;
            agg.adj.push_back(cv);
            agg.weight.push_back(w);
        }
        agg.offsets[c + 1] = agg.adj.size();
    }
    return agg;
}

// One full two-phase run with a fixed seed.
ClusteringResult louvain_attempt(const Graph& graph, const LouvainOptions& options,
                                 uint64_t seed) {
    const uint32_t n = graph.num_nodes();
    ClusteringResult res;
    res.assignment.resize(n);
    std::iota(res.assignment.begin(), res.assignment.end(), 0);
    res.num_communities = n;

    LevelGraph level = LevelGraph::from(graph);
    std::vector<uint32_t> node_to_comm(n);
    std::iota(node_to_comm.begin(), node_to_comm.end(), 0);

    while (true) {
        LocalMoveResult lm = local_move(level, options.resolution, options.min_gain,
                                        mix_seed(seed, res.levels));
        if (!lm.moved_any) break;
        ++res.levels;
        for (uint32_t u = 0; u < n; ++u)
            node_to_comm[u] = lm.assignment[node_to_comm[u]];
        if (lm.num_communities == level.n) break;
        level = aggregate(level, lm.assignment, lm.num_communities);
    }

    // Final dense renumber by first occurrence over node id.
    std::vector<uint32_t> remap(n, UINT32_MAX);
    uint32_t next = 0;
    for (uint32_t u = 0; u < n; ++u) {
        uint32_t c = node_to_comm[u];
        if (remap[c] == UINT32_MAX) remap[c] = next++;
        res.assignment[u] = remap[c];
    }
    res.num_communities = next;
    res.modularity = modularity(graph, res.assignment, options.resolution);
    return res;
}

}  // namespace

ClusteringResult louvain(const Graph& graph, const LouvainOptions& options) {
    const uint32_t n = graph.num_nodes();
    if (graph.num_edges() == 0 || n == 0) {
        ClusteringResult res;  // singletons, Q = 0
        res.assignment.resize(n);
        std::iota(res.assignment.begin(), res.assignment.end(), 0);
        res.num_communities = n;
        return res;
    }

    uint32_t attempts = std::max(options.restarts, 1u);
    ClusteringResult best;
    for (uint32_t a = 0; a < attempts; ++a) {
        ClusteringResult res =
            louvain_attempt(graph, options, mix_seed(options.seed, fnv1a64("attempt"), a));
        if (a == 0 || res.modularity > best.modularity) best = std::move(res);
    }
    return best;
}

void write_communities(std::span<const uint32_t> assignment, const IdMap& ids,
                       std::ostream& out) {
    out << "node,community\n";
    for (uint32_t u = 0; u < assignment.size(); ++u)
        out << ids.name(u) << ',' << assignment[u] << '\n';
}

void write_communities_file(std::span<const uint32_t> assignment, const IdMap& ids,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write communities file: " + path);
    write_communities(assignment, ids, out);
    if (!out) throw DataError("short write on communities file: " + path);
}

CommunitiesLoad read_communities(std::istream& in) {
    CommunitiesLoad load;
    std::string line;
    uint64_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw ParseError("expected `node,community`", line_no);
        std::string node = line.substr(0, comma);
        std::string comm = line.substr(comma + 1);
        if (!saw_header) {
            saw_header = true;
            if (node == "node" && comm == "community") continue;
            throw ParseError("missing `node,community` header", line_no);
        }
        uint32_t c = 0;
        auto [ptr, ec] = std::from_chars(comm.data(), comm.data() + comm.size(), c);
        if (ec != std::errc() || ptr != comm.data() + comm.size())
            throw ParseError("community id is not an integer: `" + comm + "`", line_no);
        uint32_t id = load.ids.add(node);
        if (id != load.assignment.size())
            throw ParseError("duplicate node in communities file: " + node, line_no);
        load.assignment.push_back(c);
        load.num_communities = std::max(load.num_communities, c + 1);
    }
    return load;
}

CommunitiesLoad read_communities_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open communities file: " + path);
    return read_communities(in);
}

}  // namespace embeval
