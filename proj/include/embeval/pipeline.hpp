#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "embeval/eval.hpp"
#include "embeval/interpretability.hpp"
#include "embeval/louvain.hpp"
#include "embeval/sgns.hpp"
#include "embeval/walks.hpp"

namespace embeval {

/// Everything one end-to-end run needs, loadable from a JSON file. Unknown
/// keys are rejected so typos fail loudly instead of silently using defaults.
struct RunConfig {
    std::string edge_list;  // required
    std::string labels;     // optional external grouping (TSV)
    std::string output_dir = "out";
    uint64_t seed = 1;
    std::vector<uint32_t> dims{10, 64, 128};

    WalkConfig walks{};              // per-stage seed is derived, not taken from here
    TrainConfig train{};             // dim and seed are overridden per sweep point
    LouvainOptions louvain_opts{};   // seed overridden
    ISConfig is_config{};
    uint32_t is_fixed_k = 0;         // 0 = group cardinality
    EvalConfig eval{};               // seed overridden
    LinkPredictionConfig lp{};       // seed overridden
    bool run_link_prediction = true;
    bool dump_walks = false;         // corpora are large; off by default

    static RunConfig from_json(const std::string& text);
    static RunConfig from_json_file(const std::string& path);
    std::string to_json() const;  // canonical form, hashed into the manifest
};

struct ReportRow {
    uint32_t dim = 0;  // 0 for dim-independent rows
    std::string task;
    std::string metric;
    double value = 0.0;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct RunManifest {
    std::string version;
    uint64_t seed = 0;
    uint64_t config_hash = 0;  // over the canonical config JSON
    std::vector<std::pair<std::string, uint64_t>> input_hashes;   // path -> content hash
    std::vector<std::pair<std::string, uint64_t>> output_hashes;  // filename -> content hash
    std::vector<StageTiming> stages;
};

struct RunResult {
    std::vector<ReportRow> rows;
    RunManifest manifest;
    GraphStats stats{};
    uint32_t num_communities = 0;
    double louvain_modularity = 0.0;
};

/// Runs load -> walks -> louvain -> per-dim (train, interpret, evaluate),
/// writing embeddings, communities, score heatmaps, reports.json/.csv and
/// manifest.json under output_dir. Stage failures surface as StageError.
RunResult run_pipeline(const RunConfig& config);

uint64_t hash_file(const std::string& path);

/// CSV `task,metric,value,dim,seed`, the flat form of reports.json.
void write_reports_csv(std::span<const ReportRow> rows, uint64_t seed, std::ostream& out);

/// Merges several runs' reports.json files into `run,dim,task,metric,value`
/// for side-by-side comparison; `run` is the report's parent directory name.
void compare_runs(std::span<const std::string> report_paths, std::ostream& out);

}  // namespace embeval
