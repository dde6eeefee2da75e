#include "embeval/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <type_traits>

#include "json.hpp"

#include "embeval/common.hpp"

namespace embeval {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void require_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) {
            std::string key = *where ? std::string(where) + "." + it.key() : it.key();
            throw DataError("unknown config key: " + key);
        }
    }
}

Agg agg_from_string(const std::string& s) {
    if (s == "max") return Agg::max;
    if (s == "mean") return Agg::mean;
    throw DataError("unknown aggregation: " + s + " (want max|mean)");
}

const char* to_string(Agg a) { return a == Agg::max ? "max" : "mean"; }

}  // namespace

RunConfig RunConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DataError("config root must be a JSON object");
    require_keys(j, "", {"edge_list", "labels", "output_dir", "seed", "dims", "walks", "train",
                         "louvain", "interpretability", "eval", "link_prediction", "dump_walks"});

    RunConfig c;
    if (!j.contains("edge_list") || !j["edge_list"].is_string())
        throw DataError("config needs a string edge_list");
    c.edge_list = j["edge_list"];
    if (j.contains("labels")) c.labels = j["labels"];
    if (j.contains("output_dir")) c.output_dir = j["output_dir"];
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("dims")) {
        c.dims = j["dims"].get<std::vector<uint32_t>>();
        if (c.dims.empty()) throw DataError("dims must not be empty");
        for (uint32_t d : c.dims)
            if (d == 0) throw DataError("dims entries must be >= 1");
    }
    if (j.contains("dump_walks")) c.dump_walks = j["dump_walks"].get<bool>();

    if (j.contains("walks")) {
        const json& w = j["walks"];
        require_keys(w, "walks", {"walks_per_node", "walk_length"});
        if (w.contains("walks_per_node")) c.walks.walks_per_node = w["walks_per_node"];
        if (w.contains("walk_length")) c.walks.walk_length = w["walk_length"];
    }
    if (j.contains("train")) {
        const json& t = j["train"];
        require_keys(t, "train",
                     {"window", "negatives", "epochs", "lr", "min_lr", "noise_exponent",
                      "subsample", "dynamic_window", "workers"});
        if (t.contains("window")) c.train.window = t["window"];
        if (t.contains("negatives")) c.train.negatives = t["negatives"];
        if (t.contains("epochs")) c.train.epochs = t["epochs"];
        if (t.contains("lr")) c.train.lr = t["lr"];
        if (t.contains("min_lr")) c.train.min_lr = t["min_lr"];
        if (t.contains("noise_exponent")) c.train.noise_exponent = t["noise_exponent"];
        if (t.contains("subsample")) c.train.subsample = t["subsample"];
        if (t.contains("dynamic_window")) c.train.dynamic_window = t["dynamic_window"].get<bool>();
        if (t.contains("workers")) c.train.workers = t["workers"];
    }
    if (j.contains("louvain")) {
        const json& l = j["louvain"];
        require_keys(l, "louvain", {"resolution", "min_gain", "restarts"});
        if (l.contains("resolution")) c.louvain_opts.resolution = l["resolution"];
        if (l.contains("min_gain")) c.louvain_opts.min_gain = l["min_gain"];
        if (l.contains("restarts")) c.louvain_opts.restarts = l["restarts"];
    }
    if (j.contains("interpretability")) {
        const json& i = j["interpretability"];
        require_keys(i, "interpretability", {"combine", "sweep", "fixed_k"});
        if (i.contains("combine")) c.is_config.combine_directions = agg_from_string(i["combine"]);
        if (i.contains("sweep")) c.is_config.sweep = agg_from_string(i["sweep"]);
        if (i.contains("fixed_k")) c.is_fixed_k = i["fixed_k"];
    }
    if (j.contains("eval")) {
        const json& e = j["eval"];
        require_keys(e, "eval",
                     {"num_pairs", "pair_op", "test_fraction", "l2", "max_iters", "tol"});
        if (e.contains("num_pairs")) c.eval.num_pairs = e["num_pairs"];
        if (e.contains("pair_op")) c.eval.pair_op = pair_op_from_string(e["pair_op"]);
        if (e.contains("test_fraction")) c.eval.test_fraction = e["test_fraction"];
        if (e.contains("l2")) c.eval.clf.l2 = e["l2"];
        if (e.contains("max_iters")) c.eval.clf.max_iters = e["max_iters"];
        if (e.contains("tol")) c.eval.clf.tol = e["tol"];
    }
    if (j.contains("link_prediction")) {
        const json& l = j["link_prediction"];
        require_keys(l, "link_prediction",
                     {"enabled", "test_fraction", "max_train_pairs", "pair_op"});
        if (l.contains("enabled")) c.run_link_prediction = l["enabled"].get<bool>();
        if (l.contains("test_fraction")) c.lp.test_fraction = l["test_fraction"];
        if (l.contains("max_train_pairs")) c.lp.max_train_pairs = l["max_train_pairs"];
        if (l.contains("pair_op")) c.lp.pair_op = pair_op_from_string(l["pair_op"]);
    }
    c.lp.clf = c.eval.clf;
    return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string RunConfig::to_json() const {
    json j;
    j["edge_list"] = edge_list;
    if (!labels.empty()) j["labels"] = labels;
    j["output_dir"] = output_dir;
    j["seed"] = seed;
    j["dims"] = dims;
    j["dump_walks"] = dump_walks;
    j["walks"] = {{"walks_per_node", walks.walks_per_node}, {"walk_length", walks.walk_length}};
    j["train"] = {{"window", train.window},
                  {"negatives", train.negatives},
                  {"epochs", train.epochs},
                  {"lr", train.lr},
                  {"min_lr", train.min_lr},
                  {"noise_exponent", train.noise_exponent},
                  {"subsample", train.subsample},
                  {"dynamic_window", train.dynamic_window},
                  {"workers", train.workers}};
    j["louvain"] = {{"resolution", louvain_opts.resolution},
                    {"min_gain", louvain_opts.min_gain},
                    {"restarts", louvain_opts.restarts}};
    j["interpretability"] = {{"combine", to_string(is_config.combine_directions)},
                             {"sweep", to_string(is_config.sweep)},
                             {"fixed_k", is_fixed_k}};
    j["eval"] = {{"num_pairs", eval.num_pairs},
                 {"pair_op", embeval::to_string(eval.pair_op)},
                 {"test_fraction", eval.test_fraction},
                 {"l2", eval.clf.l2},
                 {"max_iters", eval.clf.max_iters},
                 {"tol", eval.clf.tol}};
    j["link_prediction"] = {{"enabled", run_link_prediction},
                            {"test_fraction", lp.test_fraction},
                            {"max_train_pairs", lp.max_train_pairs},
                            {"pair_op", embeval::to_string(lp.pair_op)}};
    return j.dump(2);
}

uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file for hashing: " + path);
    uint64_t h = 1469598103934665603ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
    return h;
}

namespace {

std::string hex64(uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Write-then-rename so partially written files never masquerade as results.
void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write file: " + tmp.string());
        out << content;
        if (!out) throw DataError("short write: " + tmp.string());
    }
    fs::rename(tmp, path);
}

struct StageRunner {
    std::vector<StageTiming>& timings;

    template <class Fn>
    auto operator()(const std::string& name, Fn&& fn) -> decltype(fn()) {
        auto t0 = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                timings.push_back({name, std::chrono::duration<double>(
                                             std::chrono::steady_clock::now() - t0)
                                             .count()});
            } else {
                auto out = fn();
                timings.push_back({name, std::chrono::duration<double>(
                                             std::chrono::steady_clock::now() - t0)
                                             .count()});
                return out;
            }
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(name, e.what());
        }
    }
};

json is_block(const ISMatrix& m, const ISAggregate& agg) {
    json b;
    b["overall"] = agg.overall;
    b["per_dim"] = agg.per_dim;
    b["per_group"] = agg.per_group;
    b["skipped_groups"] = m.skipped_groups;
    return b;
}

}  // namespace

RunResult run_pipeline(const RunConfig& config) {
    RunResult res;
    res.manifest.version = kVersion;
    res.manifest.seed = config.seed;
    std::string config_json = config.to_json();
    res.manifest.config_hash = fnv1a64(config_json);
    StageRunner stage{res.manifest.stages};

    fs::create_directories(config.output_dir);
    fs::path out_dir(config.output_dir);
    auto track_output = [&](const fs::path& p) {
        res.manifest.output_hashes.emplace_back(p.filename().string(), hash_file(p.string()));
    };

    // ---- load ----------------------------------------------------------
    Graph graph = stage("load", [&] { return load_edge_list_file(config.edge_list); });
    res.manifest.input_hashes.emplace_back(config.edge_list, hash_file(config.edge_list));
    res.stats = graph_stats(graph);
    res.rows.push_back({0, "graph", "nodes", static_cast<double>(res.stats.num_nodes)});
    res.rows.push_back({0, "graph", "edges", static_cast<double>(res.stats.num_edges)});
    res.rows.push_back({0, "graph", "density", res.stats.density});
    res.rows.push_back({0, "graph", "components", static_cast<double>(res.stats.num_components)});

    NodeGrouping label_grouping;
    bool have_labels = !config.labels.empty();
    if (have_labels) {
        label_grouping = stage("load-labels", [&] { return load_labels_file(config.labels, graph); });
        res.manifest.input_hashes.emplace_back(config.labels, hash_file(config.labels));
    }

    // ---- walks (shared across the dim sweep) ----------------------------
    WalkConfig wc = config.walks;
    wc.seed = stage_seed(config.seed, "walks");
    WalkCorpus corpus = stage("walks", [&] { return generate_walks(graph, wc); });
    if (config.dump_walks) {
        fs::path p = out_dir / "walks.txt";
        std::ofstream out(p);
        if (!out) throw StageError("walks", "cannot write " + p.string());
        write_corpus(corpus, graph.ids(), out);
        out.close();
        track_output(p);
    }

    // ---- communities -----------------------------------------------------
    LouvainOptions lo = config.louvain_opts;
    lo.seed = stage_seed(config.seed, "louvain");
    ClusteringResult clustering = stage("louvain", [&] { return louvain(graph, lo); });
    res.num_communities = clustering.num_communities;
    res.louvain_modularity = clustering.modularity;
    res.rows.push_back(
        {0, "louvain", "num_communities", static_cast<double>(clustering.num_communities)});
    res.rows.push_back({0, "louvain", "modularity", clustering.modularity});
    {
        fs::path p = out_dir / "communities.csv";
        write_communities_file(clustering.assignment, graph.ids(), p.string());
        track_output(p);
    }
    NodeGrouping community_grouping =
        make_partition(clustering.assignment, clustering.num_communities);

    json is_json;
    std::vector<std::string> skipped;

    // ---- per-dimension sweep ---------------------------------------------
    for (uint32_t dim : config.dims) {
        std::string dtag = "d" + std::to_string(dim);
        TrainConfig tc = config.train;
        tc.dim = dim;
        tc.seed = stage_seed(config.seed, "train-" + dtag);
        EmbeddingMatrix emb =
            stage("train-" + dtag, [&] { return train_sgns(corpus, tc); });
        if (emb.rows != graph.num_nodes())
            throw StageError("train-" + dtag, "corpus does not cover every node");
        {
            fs::path p = out_dir / ("embedding_" + dtag + ".txt");
            write_embedding(emb, graph.ids(), p.string());
            track_output(p);
        }

        stage("interpret-" + dtag, [&] {
            ISMatrix internal = is_scores(emb, community_grouping, config.is_fixed_k);
            ISAggregate agg_int = aggregate(internal, config.is_config);
            fs::path p = out_dir / ("is_internal_" + dtag + ".csv");
            export_is_heatmap_file(internal, community_grouping.group_names, p.string());
            track_output(p);
            res.rows.push_back({dim, "interpretability_internal", "is_overall", agg_int.overall});
            is_json["internal"][std::to_string(dim)] = is_block(internal, agg_int);

            if (have_labels) {
                ISMatrix external = is_scores(emb, label_grouping, config.is_fixed_k);
                ISAggregate agg_ext = aggregate(external, config.is_config);
                fs::path q = out_dir / ("is_external_" + dtag + ".csv");
                export_is_heatmap_file(external, label_grouping.group_names, q.string());
                track_output(q);
                res.rows.push_back(
                    {dim, "interpretability_external", "is_overall", agg_ext.overall});
                is_json["external"][std::to_string(dim)] = is_block(external, agg_ext);
            }
        });

        EvalConfig ec = config.eval;
        ec.seed = stage_seed(config.seed, "eval-" + dtag);
        stage("evaluate-" + dtag, [&] {
            if (community_grouping.num_groups >= 2) {
                for (auto& r :
                     eval_pairwise_binary(emb, community_grouping, "community_binary", ec))
                    res.rows.push_back({dim, r.task, r.metric, r.value});
                for (auto& r :
                     eval_multiclass(emb, community_grouping, "community_multiclass", ec))
                    res.rows.push_back({dim, r.task, r.metric, r.value});
            } else {
                skipped.push_back("community tasks at " + dtag +
                                  ": fewer than two communities");
            }
            if (have_labels) {
                if (label_grouping.num_groups >= 2) {
                    for (auto& r : eval_pairwise_binary(emb, label_grouping, "group_binary", ec))
                        res.rows.push_back({dim, r.task, r.metric, r.value});
                } else {
                    skipped.push_back("group_binary at " + dtag + ": fewer than two groups");
                }
                for (auto& r : eval_multilabel(emb, label_grouping, "group_multilabel", ec))
                    res.rows.push_back({dim, r.task, r.metric, r.value});
            }
        });

        if (config.run_link_prediction) {
            LinkPredictionConfig lpc = config.lp;
            lpc.seed = stage_seed(config.seed, "lp-" + dtag);
            TrainConfig ltc = tc;
            ltc.seed = stage_seed(config.seed, "lp-train-" + dtag);
            WalkConfig lwc = wc;
            lwc.seed = stage_seed(config.seed, "lp-walks-" + dtag);
            TaskResult r = stage("link-prediction-" + dtag,
                                 [&] { return link_prediction_eval(graph, lwc, ltc, lpc); });
            res.rows.push_back({dim, r.task, r.metric, r.value});
        }
    }

    // ---- reports ----------------------------------------------------------
    json report;
    report["version"] = kVersion;
    report["seed"] = config.seed;
    report["graph"] = {{"nodes", res.stats.num_nodes},
                       {"edges", res.stats.num_edges},
                       {"density", res.stats.density},
                       {"components", res.stats.num_components}};
    report["louvain"] = {{"num_communities", res.num_communities},
                         {"modularity", res.louvain_modularity}};
    report["results"] = json::array();
    for (const auto& r : res.rows)
        report["results"].push_back(
            {{"dim", r.dim}, {"task", r.task}, {"metric", r.metric}, {"value", r.value}});
    report["skipped"] = skipped;
    report["interpretability"] = is_json;
    atomic_write(out_dir / "reports.json", report.dump(2) + "\n");
    track_output(out_dir / "reports.json");

    {
        std::ostringstream csv;
        write_reports_csv(res.rows, config.seed, csv);
        atomic_write(out_dir / "reports.csv", csv.str());
        track_output(out_dir / "reports.csv");
    }

    json manifest;
    manifest["version"] = res.manifest.version;
    manifest["seed"] = res.manifest.seed;
    manifest["config_hash"] = hex64(res.manifest.config_hash);
    manifest["config"] = json::parse(config_json);
    manifest["inputs"] = json::array();
    for (auto& [path, h] : res.manifest.input_hashes)
        manifest["inputs"].push_back({{"path", path}, {"fnv1a64", hex64(h)}});
    manifest["outputs"] = json::array();
    for (auto& [name, h] : res.manifest.output_hashes)
        manifest["outputs"].push_back({{"file", name}, {"fnv1a64", hex64(h)}});
    manifest["stages"] = json::array();
    for (auto& s : res.manifest.stages)
        manifest["stages"].push_back({{"stage", s.stage}, {"seconds", s.seconds}});
    atomic_write(out_dir / "manifest.json", manifest.dump(2) + "\n");

    return res;
}

void write_reports_csv(std::span<const ReportRow> rows, uint64_t seed, std::ostream& out) {
    out << "task,metric,value,dim,seed\n";
    char num[64];
    for (const auto& r : rows) {
        std::snprintf(num, sizeof num, "%.17g", r.value);
        out << r.task << ',' << r.metric << ',' << num << ',' << r.dim << ',' << seed << '\n';
    }
}

void compare_runs(std::span<const std::string> report_paths, std::ostream& out) {
    out << "run,dim,task,metric,value\n";
    char num[64];
    for (const auto& path : report_paths) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open report: " + path);
        json j;
        try {
            in >> j;
        } catch (const json::parse_error& e) {
            throw DataError("report " + path + " is not valid JSON: " + e.what());
        }
        fs::path p(path);
        std::string run = p.has_parent_path() ? p.parent_path().filename().string() : "";
        if (run.empty()) run = p.filename().string();
        if (!j.contains("results") || !j["results"].is_array())
            throw DataError("report " + path + " has no results array");
        for (const auto& r : j["results"]) {
            std::snprintf(num, sizeof num, "%.17g", r["value"].get<double>());
            out << run << ',' << r["dim"].get<uint32_t>() << ','
                << r["task"].get<std::string>() << ',' << r["metric"].get<std::string>() << ','
                << num << '\n';
        }
    }
}

}  // namespace embeval
