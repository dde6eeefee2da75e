// embeval: random-walk node embeddings, community detection, per-dimension
// interpretability scores, and downstream evaluation in one binary.
//
// Exit codes: 0 success, 1 usage error, 2 bad input data, 3 stage failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "embeval/common.hpp"
#include "embeval/eval.hpp"
#include "embeval/graph.hpp"
#include "embeval/grouping.hpp"
#include "embeval/interpretability.hpp"
#include "embeval/louvain.hpp"
#include "embeval/pipeline.hpp"
#include "embeval/sgns.hpp"
#include "embeval/walks.hpp"

namespace {

using namespace embeval;

constexpr const char* kStatsHelp =
    "Print node/edge counts, density and connected components for an edge list.\n"
    "Density is 2E / (N(N-1)), reported to two significant figures.\n"
    "Caveat for cross-checking against published benchmark tables: Flickr is\n"
    "often listed with density 1.18e-3, but its usual citation (N=80,513,\n"
    "E=5,899,882) gives 1.8e-3 under this formula. When numbers disagree at\n"
    "that scale, trust the computed value for the edge list actually loaded.";

struct StatsArgs {
    std::string edges;
};

void run_stats(const StatsArgs& a) {
    Graph g = load_edge_list_file(a.edges);
    GraphStats s = graph_stats(g);
    std::printf("nodes: %llu\n", static_cast<unsigned long long>(s.num_nodes));
    std::printf("edges: %llu\n", static_cast<unsigned long long>(s.num_edges));
    std::printf("density: %.1e\n", s.density);
    std::printf("components: %llu\n", static_cast<unsigned long long>(s.num_components));
    if (g.self_loops_dropped() > 0)
        std::printf("self_loops_dropped: %llu\n",
                    static_cast<unsigned long long>(g.self_loops_dropped()));
}

struct WalkArgs {
    std::string edges, output;
    WalkConfig cfg;
    unsigned workers = 0;
};

void run_walk(const WalkArgs& a) {
    Graph g = load_edge_list_file(a.edges);
    WalkCorpus corpus = generate_walks(g, a.cfg, a.workers);
    std::ofstream out(a.output);
    if (!out) throw DataError("cannot write corpus file: " + a.output);
    write_corpus(corpus, g.ids(), out);
    if (!out) throw DataError("short write on corpus file: " + a.output);
    std::printf("walks: %llu\n", static_cast<unsigned long long>(corpus.num_walks()));
    std::printf("tokens: %llu\n", static_cast<unsigned long long>(corpus.total_tokens()));
}

struct TrainArgs {
    std::string corpus, output;
    TrainConfig cfg;
};

void run_train(const TrainArgs& a) {
    CorpusLoad load = read_corpus_file(a.corpus);
    TrainStats stats;
    EmbeddingMatrix emb = train_sgns(load.corpus, a.cfg, &stats);
    write_embedding(emb, load.ids, a.output);
    std::printf("vocab: %u\n", emb.rows);
    std::printf("dim: %u\n", emb.dim);
    for (size_t e = 0; e < stats.epoch_losses.size(); ++e)
        std::printf("epoch %zu: loss %.6f over %llu pairs\n", e + 1, stats.epoch_losses[e],
                    static_cast<unsigned long long>(stats.epoch_pairs[e]));
}

struct CommunitiesArgs {
    std::string edges, output;
    LouvainOptions opts;
};

void run_communities(const CommunitiesArgs& a) {
    Graph g = load_edge_list_file(a.edges);
    if (g.num_edges() == 0)
        std::fprintf(stderr,
                     "warning: graph has no edges; every node becomes its own community\n");
    ClusteringResult r = louvain(g, a.opts);
    write_communities_file(r.assignment, g.ids(), a.output);
    std::printf("communities: %u\n", r.num_communities);
    std::printf("modularity: %.6f\n", r.modularity);
    std::printf("levels: %u\n", r.levels);
}

struct InterpretArgs {
    std::string embedding, communities, labels, output;
    std::string combine = "max", sweep = "max";
    uint32_t fixed_k = 0;
};

NodeGrouping grouping_for_embedding(const EmbeddingLoad& emb, const std::string& communities,
                                    const std::string& labels) {
    if (communities.empty() == labels.empty())
        throw DataError("pass exactly one of --communities or --labels");
    if (!communities.empty()) {
        CommunitiesLoad cl = read_communities_file(communities);
        std::vector<uint32_t> assignment(emb.emb.rows);
        for (uint32_t r = 0; r < emb.emb.rows; ++r) {
            auto id = cl.ids.find(emb.ids.name(r));
            if (!id)
                throw DataError("node " + emb.ids.name(r) + " missing from communities file");
            assignment[r] = cl.assignment[*id];
        }
        return make_partition(std::move(assignment), cl.num_communities);
    }
    std::ifstream in(labels);
    if (!in) throw DataError("cannot open labels file: " + labels);
    return load_labels(in, emb.ids, emb.emb.rows);
}

void run_interpret(const InterpretArgs& a) {
    EmbeddingLoad emb = read_embedding_file(a.embedding);
    NodeGrouping grouping = grouping_for_embedding(emb, a.communities, a.labels);

    ISMatrix m = is_scores(emb.emb, grouping, a.fixed_k);
    ISConfig cfg;
    cfg.combine_directions = a.combine == "mean" ? Agg::mean : Agg::max;
    cfg.sweep = a.sweep == "mean" ? Agg::mean : Agg::max;
    if (a.combine != "max" && a.combine != "mean")
        throw DataError("--combine wants max|mean");
    if (a.sweep != "max" && a.sweep != "mean") throw DataError("--sweep wants max|mean");
    ISAggregate agg = aggregate(m, cfg);

    if (!a.output.empty()) export_is_heatmap_file(m, grouping.group_names, a.output);
    std::printf("dimensions: %u\n", m.num_dims);
    std::printf("groups: %u\n", m.num_groups);
    if (!m.skipped_groups.empty())
        std::printf("skipped_empty_groups: %zu\n", m.skipped_groups.size());
    std::printf("is_overall: %.6f\n", agg.overall);
    double best = 0;
    uint32_t best_dim = 0;
    for (uint32_t d = 0; d < agg.per_dim.size(); ++d)
        if (agg.per_dim[d] > best) {
            best = agg.per_dim[d];
            best_dim = d;
        }
    std::printf("best_dimension: %u (%.6f)\n", best_dim, best);
}

struct EvaluateArgs {
    std::string embedding, task, communities, labels, edges;
    EvalConfig eval;
    LinkPredictionConfig lp;
    WalkConfig walks;
    TrainConfig train;
};

void run_evaluate(const EvaluateArgs& a) {
    std::vector<TaskResult> results;
    if (a.task == "link_prediction") {
        if (a.edges.empty()) throw DataError("link_prediction needs --edges");
        Graph g = load_edge_list_file(a.edges);
        results.push_back(link_prediction_eval(g, a.walks, a.train, a.lp));
    } else {
        if (a.embedding.empty()) throw DataError("task " + a.task + " needs --embedding");
        EmbeddingLoad emb = read_embedding_file(a.embedding);
        NodeGrouping grouping = grouping_for_embedding(emb, a.communities, a.labels);
        if (a.task == "community_binary" || a.task == "group_binary") {
            results = eval_pairwise_binary(emb.emb, grouping, a.task, a.eval);
        } else if (a.task == "community_multiclass") {
            results = eval_multiclass(emb.emb, grouping, a.task, a.eval);
        } else if (a.task == "group_multilabel") {
            results = eval_multilabel(emb.emb, grouping, a.task, a.eval);
        } else {
            throw DataError("unknown task: " + a.task);
        }
    }
    std::printf("task,metric,value,train_size,test_size\n");
    for (const auto& r : results)
        std::printf("%s,%s,%.6f,%llu,%llu\n", r.task.c_str(), r.metric.c_str(), r.value,
                    static_cast<unsigned long long>(r.train_size),
                    static_cast<unsigned long long>(r.test_size));
}

struct PipelineArgs {
    std::string config;
    std::string output_dir;  // overrides config / env when set
};

void run_pipeline_cmd(const PipelineArgs& a) {
    RunConfig config = RunConfig::from_json_file(a.config);
    if (!a.output_dir.empty()) {
        config.output_dir = a.output_dir;
    } else if (const char* env = std::getenv("EMBEVAL_OUTPUT_DIR"); env && *env) {
        config.output_dir = env;
    }
    RunResult res = run_pipeline(config);
    std::printf("output_dir: %s\n", config.output_dir.c_str());
    std::printf("nodes: %llu  edges: %llu  density: %.1e\n",
                static_cast<unsigned long long>(res.stats.num_nodes),
                static_cast<unsigned long long>(res.stats.num_edges), res.stats.density);
    std::printf("communities: %u  modularity: %.6f\n", res.num_communities,
                res.louvain_modularity);
    for (const auto& r : res.rows)
        if (r.dim > 0)
            std::printf("d=%u %s %s = %.6f\n", r.dim, r.task.c_str(), r.metric.c_str(), r.value);
    double total = 0;
    for (const auto& s : res.manifest.stages) total += s.seconds;
    std::printf("stages: %zu in %.1fs\n", res.manifest.stages.size(), total);
}

struct CompareArgs {
    std::vector<std::string> reports;
    std::string output;
};

void run_compare(const CompareArgs& a) {
    if (a.output.empty()) {
        compare_runs(a.reports, std::cout);
        return;
    }
    std::ofstream out(a.output);
    if (!out) throw DataError("cannot write comparison file: " + a.output);
    compare_runs(a.reports, out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"node embedding training, interpretability scoring and evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    StatsArgs stats_args;
    auto* stats = app.add_subcommand("stats", kStatsHelp);
    stats->add_option("edges", stats_args.edges, "edge list file")->required();
    stats->callback([&] { run_stats(stats_args); });

    WalkArgs walk_args;
    auto* walk = app.add_subcommand("walk", "generate a random-walk corpus from an edge list");
    walk->add_option("--edges", walk_args.edges, "edge list file")->required();
    walk->add_option("--output", walk_args.output, "corpus output file")->required();
    walk->add_option("--walks-per-node", walk_args.cfg.walks_per_node, "walks started per node");
    walk->add_option("--walk-length", walk_args.cfg.walk_length, "maximum walk length");
    walk->add_option("--seed", walk_args.cfg.seed, "random seed");
    walk->add_option("--workers", walk_args.workers, "worker threads (0 = auto)");
    walk->callback([&] { run_walk(walk_args); });

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train skip-gram embeddings on a walk corpus");
    train->add_option("--corpus", train_args.corpus, "walk corpus file")->required();
    train->add_option("--output", train_args.output, "embedding output file")->required();
    train->add_option("--dim", train_args.cfg.dim, "embedding dimensions");
    train->add_option("--window", train_args.cfg.window, "context window");
    train->add_option("--negatives", train_args.cfg.negatives, "negative samples per pair");
    train->add_option("--epochs", train_args.cfg.epochs, "training epochs");
    train->add_option("--lr", train_args.cfg.lr, "initial learning rate");
    train->add_option("--min-lr", train_args.cfg.min_lr, "final learning rate");
    train->add_option("--subsample", train_args.cfg.subsample,
                      "frequent-token downsampling threshold (0 = off)");
    train->add_flag("--fixed-window", [&](int64_t) { train_args.cfg.dynamic_window = false; },
                    "disable per-center window shrinking");
    train->add_option("--workers", train_args.cfg.workers, "worker threads (1 = deterministic)");
    train->add_option("--seed", train_args.cfg.seed, "random seed");
    train->callback([&] { run_train(train_args); });

    CommunitiesArgs comm_args;
    auto* comm = app.add_subcommand("communities", "detect communities with Louvain");
    comm->add_option("--edges", comm_args.edges, "edge list file")->required();
    comm->add_option("--output", comm_args.output, "communities CSV output")->required();
    comm->add_option("--resolution", comm_args.opts.resolution, "resolution parameter");
    comm->add_option("--seed", comm_args.opts.seed, "random seed");
    comm->add_option("--restarts", comm_args.opts.restarts,
                     "seeded attempts, best modularity wins");
    comm->callback([&] { run_communities(comm_args); });

    InterpretArgs int_args;
    auto* interp = app.add_subcommand(
        "interpret", "score how sharply embedding dimensions separate node groups");
    interp->add_option("--embedding", int_args.embedding, "embedding file")->required();
    interp->add_option("--communities", int_args.communities, "communities CSV (internal groups)");
    interp->add_option("--labels", int_args.labels, "labels TSV (external groups)");
    interp->add_option("--output", int_args.output, "heatmap CSV output");
    interp->add_option("--combine", int_args.combine, "combine top/bottom: max|mean");
    interp->add_option("--sweep", int_args.sweep, "collapse dims/groups: max|mean");
    interp->add_option("--fixed-k", int_args.fixed_k, "fixed top-k (0 = group cardinality)");
    interp->callback([&] { run_interpret(int_args); });

    EvaluateArgs eval_args;
    auto* eval = app.add_subcommand("evaluate", "run one downstream task");
    eval->add_option("--task", eval_args.task,
                     "community_binary|community_multiclass|group_binary|group_multilabel|"
                     "link_prediction")
        ->required();
    eval->add_option("--embedding", eval_args.embedding, "embedding file (non-LP tasks)");
    eval->add_option("--communities", eval_args.communities, "communities CSV");
    eval->add_option("--labels", eval_args.labels, "labels TSV");
    eval->add_option("--edges", eval_args.edges, "edge list (link_prediction)");
    eval->add_option("--num-pairs", eval_args.eval.num_pairs, "pair sample size (0 = exhaustive)");
    eval->add_option("--pair-op",
                     [&eval_args](const std::vector<std::string>& v) {
                         eval_args.eval.pair_op = pair_op_from_string(v.at(0));
                         eval_args.lp.pair_op = eval_args.eval.pair_op;
                         return true;
                     },
                     "pair features: hadamard|average|concat|abs_diff");
    eval->add_option("--test-fraction", eval_args.eval.test_fraction, "held-out share");
    eval->add_option("--seed",
                     [&eval_args](const std::vector<std::string>& v) {
                         eval_args.eval.seed = std::stoull(v.at(0));
                         eval_args.lp.seed = eval_args.eval.seed;
                         eval_args.walks.seed = mix_seed(eval_args.eval.seed, fnv1a64("walks"));
                         eval_args.train.seed = mix_seed(eval_args.eval.seed, fnv1a64("train"));
                         return true;
                     },
                     "random seed");
    eval->add_option("--dim", eval_args.train.dim, "embedding dim for link_prediction retrain");
    eval->add_option("--epochs", eval_args.train.epochs, "epochs for link_prediction retrain");
    eval->add_option("--walks-per-node", eval_args.walks.walks_per_node,
                     "walks per node for link_prediction retrain");
    eval->add_option("--walk-length", eval_args.walks.walk_length,
                     "walk length for link_prediction retrain");
    eval->add_option("--lp-test-fraction", eval_args.lp.test_fraction, "edges held out for LP");
    eval->add_option("--lp-max-train-pairs", eval_args.lp.max_train_pairs,
                     "cap on LP training pairs per class");
    eval->callback([&] { run_evaluate(eval_args); });

    PipelineArgs pipe_args;
    auto* pipe = app.add_subcommand("pipeline", "run the full pipeline from a JSON config");
    pipe->add_option("--config", pipe_args.config, "JSON run config")->required();
    pipe->add_option("--output-dir", pipe_args.output_dir,
                     "override output directory (also: EMBEVAL_OUTPUT_DIR)");
    pipe->callback([&] { run_pipeline_cmd(pipe_args); });

    CompareArgs cmp_args;
    auto* cmp = app.add_subcommand("compare", "merge reports.json files into one CSV");
    cmp->add_option("reports", cmp_args.reports, "reports.json files")->required();
    cmp->add_option("--output", cmp_args.output, "CSV output (default stdout)");
    cmp->callback([&] { run_compare(cmp_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const StageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
