#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "embeval/louvain.hpp"

using namespace embeval;

namespace {

Graph complete(uint32_t n, uint32_t offset = 0, uint32_t total = 0) {
    std::vector<std::pair<uint32_t, uint32_t>> edges;
    for (uint32_t u = 0; u < n; ++u)
        for (uint32_t v = u + 1; v < n; ++v) edges.push_back({offset + u, offset + v});
    return Graph::from_edges(total ? total : n, edges);
}

// Straight-from-the-definition modularity, organized differently from the
// library (per-edge accumulation instead of per-community totals).
double naive_modularity(const Graph& g, std::span<const uint32_t> comm, double res = 1.0) {
    double m = static_cast<double>(g.num_edges());
    double intra = 0;
    for (uint32_t u = 0; u < g.num_nodes(); ++u)
        for (uint32_t v : g.neighbors(u))
            if (u < v && comm[u] == comm[v]) intra += 1.0;

    uint32_t k = *std::max_element(comm.begin(), comm.end()) + 1;
    std::vector<double> deg_sum(k, 0.0);
    for (uint32_t u = 0; u < g.num_nodes(); ++u) deg_sum[comm[u]] += g.degree(u);

    double q = intra / m;
    for (double d : deg_sum) q -= res * (d / (2 * m)) * (d / (2 * m));
    return q;
}

// All partitions of {0..n-1} via restricted growth strings: a[i] may rise to
// one past the prefix maximum. Successor search is quadratic, which is nothing
// at the sizes enumerated here.
template <class F>
void for_each_partition(uint32_t n, F&& fn) {
    std::vector<uint32_t> a(n, 0);
    while (true) {
        fn(a);
        int i = static_cast<int>(n) - 1;
        for (; i > 0; --i) {
            uint32_t prefix_max = 0;
            for (int j = 0; j < i; ++j) prefix_max = std::max(prefix_max, a[j]);
            if (a[i] <= prefix_max) break;  // strictly below the cap, can bump
        }
        if (i == 0) break;
        ++a[i];
        std::fill(a.begin() + i + 1, a.end(), 0);
    }
}

double best_partition_modularity(const Graph& g) {
    double best = -2;
    for_each_partition(g.num_nodes(), [&](const std::vector<uint32_t>& part) {
        best = std::max(best, naive_modularity(g, part));
    });
    return best;
}

Graph random_graph(uint32_t n, uint64_t seed) {
    uint64_t state = seed;
    std::vector<std::pair<uint32_t, uint32_t>> edges;
    for (uint32_t u = 0; u < n; ++u)
        for (uint32_t v = u + 1; v < n; ++v)
            if (splitmix64_next(state) % 100 < 40) edges.push_back({u, v});
    return Graph::from_edges(n, edges);
}

}  // namespace

TEST_CASE("partition enumeration hits the Bell numbers") {
    for (auto [n, bell] : {std::pair{2u, 2u}, {3u, 5u}, {4u, 15u}, {5u, 52u}}) {
        uint32_t count = 0;
        for_each_partition(n, [&](const std::vector<uint32_t>&) { ++count; });
        CHECK(count == bell);
    }
}

TEST_CASE("all nodes in one community scores zero") {
    Graph g = complete(6);
    std::vector<uint32_t> one(6, 0);
    CHECK(modularity(g, one) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("splitting a single edge scores minus one half") {
    std::vector<std::pair<uint32_t, uint32_t>> e{{0, 1}};
    Graph g = Graph::from_edges(2, e);
    std::vector<uint32_t> split{0, 1};
    CHECK(modularity(g, split) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("two disjoint edges in their own communities score one half") {
    std::vector<std::pair<uint32_t, uint32_t>> e{{0, 1}, {2, 3}};
    Graph g = Graph::from_edges(4, e);
    std::vector<uint32_t> comm{0, 0, 1, 1};
    CHECK(modularity(g, comm) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("modularity matches the per-edge formulation on random graphs") {
    uint64_t state = 5;
    for (int trial = 0; trial < 20; ++trial) {
        uint32_t n = 4 + static_cast<uint32_t>(splitmix64_next(state) % 8);
        Graph g = random_graph(n, splitmix64_next(state));
        if (g.num_edges() == 0) continue;
        std::vector<uint32_t> comm(n);
        for (auto& c : comm) c = static_cast<uint32_t>(splitmix64_next(state) % 3);
        for (double res : {0.5, 1.0, 2.0})
            CHECK(modularity(g, comm, res) ==
                  doctest::Approx(naive_modularity(g, comm, res)).epsilon(1e-10));
    }
}

TEST_CASE("modularity rejects edgeless graphs and size mismatches") {
    Graph g = Graph::from_edges(3, {});
    std::vector<uint32_t> comm{0, 1, 2};
    CHECK_THROWS_AS(modularity(g, comm), DataError);

    Graph path = Graph::from_edges(2, std::vector<std::pair<uint32_t, uint32_t>>{{0, 1}});
    std::vector<uint32_t> wrong{0};
    CHECK_THROWS_AS(modularity(path, wrong), DataError);
}

TEST_CASE("louvain puts the two cliques of a dumbbell apart") {
    // K5 + K5, one bridge 0-5... build via two complete blocks plus bridge.
    std::vector<std::pair<uint32_t, uint32_t>> edges;
    for (uint32_t off : {0u, 5u})
        for (uint32_t u = 0; u < 5; ++u)
            for (uint32_t v = u + 1; v < 5; ++v) edges.push_back({off + u, off + v});
    edges.push_back({0, 5});
    Graph g = Graph::from_edges(10, edges);

    ClusteringResult res = louvain(g);
    CHECK(res.num_communities == 2);
    std::set<uint32_t> left(res.assignment.begin(), res.assignment.begin() + 5);
    std::set<uint32_t> right(res.assignment.begin() + 5, res.assignment.end());
    CHECK(left.size() == 1);
    CHECK(right.size() == 1);
    CHECK(*left.begin() != *right.begin());
    CHECK(res.assignment[0] == 0);  // renumbered by first occurrence
    CHECK(res.modularity == doctest::Approx(naive_modularity(g, res.assignment)).epsilon(1e-10));
}

TEST_CASE("two triangles joined by a bridge reach the known optimum") {
    std::vector<std::pair<uint32_t, uint32_t>> edges{{0, 1}, {1, 2}, {0, 2},
                                                     {3, 4}, {4, 5}, {3, 5}, {2, 3}};
    Graph g = Graph::from_edges(6, edges);
    ClusteringResult res = louvain(g);
    CHECK(res.num_communities == 2);
    CHECK(res.modularity == doctest::Approx(5.0 / 14.0).epsilon(1e-9));  // 0.357142857...
}

namespace {

using EdgeList = std::vector<std::pair<uint32_t, uint32_t>>;

EdgeList clique_edges(uint32_t k, uint32_t offset = 0) {
    EdgeList e;
    for (uint32_t u = 0; u < k; ++u)
        for (uint32_t v = u + 1; v < k; ++v) e.push_back({offset + u, offset + v});
    return e;
}

EdgeList operator+(EdgeList a, const EdgeList& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

EdgeList cycle_edges(uint32_t n) {
    EdgeList e;
    for (uint32_t i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
    return e;
}

// Fixed structured graphs, n <= 8, with enumerable optima.
std::vector<std::pair<const char*, Graph>> structured_test_set() {
    std::vector<std::pair<const char*, Graph>> set;
    set.emplace_back("triangles+bridge",
                     Graph::from_edges(6, clique_edges(3) + clique_edges(3, 3) + EdgeList{{2, 3}}));
    set.emplace_back("triangles disjoint",
                     Graph::from_edges(6, clique_edges(3) + clique_edges(3, 3)));
    set.emplace_back("K4+K4 bridge",
                     Graph::from_edges(8, clique_edges(4) + clique_edges(4, 4) + EdgeList{{0, 4}}));
    set.emplace_back("K4 disjoint K4",
                     Graph::from_edges(8, clique_edges(4) + clique_edges(4, 4)));
    set.emplace_back("C8", Graph::from_edges(8, cycle_edges(8)));
    {
        EdgeList star;
        for (uint32_t i = 1; i < 8; ++i) star.push_back({0, i});
        set.emplace_back("star", Graph::from_edges(8, star));
    }
    {
        EdgeList path;
        for (uint32_t i = 0; i < 7; ++i) path.push_back({i, i + 1});
        set.emplace_back("P8", Graph::from_edges(8, path));
    }
    set.emplace_back("K8", Graph::from_edges(8, clique_edges(8)));
    {
        EdgeList bip;
        for (uint32_t u = 0; u < 4; ++u)
            for (uint32_t v = 4; v < 8; ++v) bip.push_back({u, v});
        set.emplace_back("K4,4", Graph::from_edges(8, bip));
    }
    set.emplace_back("C4+C4 bridge",
                     Graph::from_edges(8, cycle_edges(4) + EdgeList{{4, 5}, {5, 6}, {6, 7}, {7, 4},
                                                                    {0, 4}}));
    set.emplace_back("K3+path+K3",
                     Graph::from_edges(8, clique_edges(3) + clique_edges(3, 5) +
                                              EdgeList{{2, 3}, {3, 4}, {4, 5}}));
    set.emplace_back("triangles+pendant",
                     Graph::from_edges(8, EdgeList{{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {3, 5},
                                                   {4, 5}, {1, 6}, {6, 7}}));
    return set;
}

}  // namespace

TEST_CASE("louvain reaches 95% of the exhaustive optimum on the fixed set") {
    // Partition counts up to n = 8 stay tiny (Bell(8) = 4140), so the true
    // optimum is enumerable.
    for (auto& [name, g] : structured_test_set()) {
        CAPTURE(name);
        double best = best_partition_modularity(g);
        ClusteringResult res = louvain(g);
        CHECK(res.modularity >= 0.95 * best - 1e-12);
        CHECK(res.modularity <= best + 1e-9);  // never above the true optimum
    }
}

TEST_CASE("louvain is statistically near-optimal on random graphs") {
    // Greedy local moves have no per-instance guarantee: there are small
    // graphs where no node order reaches the optimum (a pair move can be
    // required whose halves are each negative). So random instances get a
    // statistical bound plus a hard never-above-optimum invariant.
    int graphs = 0, hit95 = 0;
    for (uint64_t seed = 1; graphs < 30; ++seed) {
        uint32_t n = 5 + static_cast<uint32_t>(seed % 4);  // 5..8
        Graph g = random_graph(n, seed * 977);
        if (g.num_edges() < 2) continue;
        ++graphs;
        double best = best_partition_modularity(g);
        ClusteringResult res = louvain(g);
        CHECK(res.modularity <= best + 1e-9);
        CHECK(res.modularity >= 0.75 * best - 1e-12);  // worst observed is ~0.81
        if (res.modularity >= 0.95 * best - 1e-12) ++hit95;
    }
    CHECK(hit95 >= graphs * 4 / 5);
}

TEST_CASE("edgeless graphs become singletons with zero modularity") {
    Graph g = Graph::from_edges(4, {});
    ClusteringResult res = louvain(g);
    CHECK(res.num_communities == 4);
    CHECK(res.assignment == std::vector<uint32_t>{0, 1, 2, 3});
    CHECK(res.modularity == 0.0);
    CHECK(res.levels == 0);
}

TEST_CASE("assignments are dense and first-occurrence ordered") {
    uint64_t state = 31;
    for (int trial = 0; trial < 8; ++trial) {
        Graph g = random_graph(8, splitmix64_next(state));
        ClusteringResult res = louvain(g, {.seed = trial + 1u});
        REQUIRE(res.assignment.size() == 8);
        uint32_t next_new = 0;
        for (uint32_t c : res.assignment) {
            CHECK(c <= next_new);  // a new label is always the next integer
            if (c == next_new) ++next_new;
        }
        CHECK(next_new == res.num_communities);
    }
}

TEST_CASE("louvain is deterministic per seed") {
    Graph g = random_graph(30, 404);
    ClusteringResult a = louvain(g, {.seed = 9});
    ClusteringResult b = louvain(g, {.seed = 9});
    CHECK(a.assignment == b.assignment);
    CHECK(a.modularity == b.modularity);
}

TEST_CASE("higher resolution splits finer") {
    // Two triangles + bridge: resolution 4 should prefer more, smaller
    // communities than resolution 1 (or at least never fewer).
    std::vector<std::pair<uint32_t, uint32_t>> edges{{0, 1}, {1, 2}, {0, 2},
                                                     {3, 4}, {4, 5}, {3, 5}, {2, 3}};
    Graph g = Graph::from_edges(6, edges);
    ClusteringResult coarse = louvain(g, {.resolution = 1.0});
    ClusteringResult fine = louvain(g, {.resolution = 6.0});
    CHECK(fine.num_communities >= coarse.num_communities);
}

TEST_CASE("relabeling nodes permutes the partition on a unique-optimum graph") {
    // Two disjoint triangles have a single optimal partition, so any node
    // relabeling must map one result onto the other exactly.
    EdgeList base = clique_edges(3) + clique_edges(3, 3);
    Graph g = Graph::from_edges(6, base);
    ClusteringResult orig = louvain(g);

    std::vector<uint32_t> perm{4, 2, 0, 5, 1, 3};  // arbitrary relabeling
    EdgeList relabeled;
    for (auto [u, v] : base) relabeled.push_back({perm[u], perm[v]});
    Graph g2 = Graph::from_edges(6, relabeled);
    ClusteringResult moved = louvain(g2);

    CHECK(moved.num_communities == orig.num_communities);
    CHECK(moved.modularity == doctest::Approx(orig.modularity).epsilon(1e-12));
    for (uint32_t u = 0; u < 6; ++u)
        for (uint32_t v = 0; v < 6; ++v)
            CHECK((orig.assignment[u] == orig.assignment[v]) ==
                  (moved.assignment[perm[u]] == moved.assignment[perm[v]]));
}

TEST_CASE("communities csv round-trips") {
    std::vector<uint32_t> assignment{0, 1, 0, 2};
    IdMap ids;
    for (const char* n : {"w", "x", "y", "z"}) ids.add(n);
    std::ostringstream out;
    write_communities(assignment, ids, out);

    std::istringstream in(out.str());
    CommunitiesLoad load = read_communities(in);
    CHECK(load.assignment == assignment);
    CHECK(load.num_communities == 3);
    CHECK(load.ids.name(0) == "w");
    CHECK(load.ids.name(3) == "z");
}

TEST_CASE("communities reader validates input") {
    std::istringstream no_header("a,0\n");
    CHECK_THROWS_AS(read_communities(no_header), ParseError);
    std::istringstream dup("node,community\na,0\na,1\n");
    CHECK_THROWS_AS(read_communities(dup), ParseError);
    std::istringstream notint("node,community\na,zero\n");
    CHECK_THROWS_AS(read_communities(notint), ParseError);
}
