#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embeval/graph.hpp"
#include "embeval/grouping.hpp"
#include "embeval/sgns.hpp"
#include "embeval/walks.hpp"

namespace embeval {

enum class PairOp { hadamard, average, concat, abs_diff };
PairOp pair_op_from_string(const std::string& s);
std::string to_string(PairOp op);

/// Feature vector for a node pair. concat orders the rows lower-id-first so
/// the features do not depend on argument order; the others are symmetric.
std::vector<float> pair_features(const EmbeddingMatrix& emb, uint32_t u, uint32_t v, PairOp op);

struct PairDataset {
    std::vector<std::pair<uint32_t, uint32_t>> pairs;  // u < v
    std::vector<uint8_t> labels;                       // 1 = same group
    uint64_t positives = 0;
};

/// Balanced same-group / different-group pair sample. num_pairs = 0
/// enumerates every pair and keeps min(#pos, #neg) per class; otherwise
/// num_pairs/2 distinct pairs per class are drawn (positives by
/// group-weighted draw, negatives by rejection). Throws DataError when a
/// class cannot supply its share.
PairDataset build_pair_dataset(const NodeGrouping& grouping, uint64_t num_pairs, uint64_t seed);

struct Split {
    std::vector<uint32_t> train, test;
};
/// Per-class shuffle-and-cut; every class with >= 2 members lands at least
/// one row in each side.
Split stratified_split(std::span<const uint32_t> y, double test_fraction, uint64_t seed);
Split random_split(uint32_t rows, double test_fraction, uint64_t seed);

struct ClassifierConfig {
    double l2 = 1e-4;
    uint32_t max_iters = 500;
    double tol = 1e-6;  // stop when the gradient inf-norm falls below this
};

/// Linear classifier over standardized features: one weight row (bias last)
/// for binary, K rows for softmax / one-vs-rest.
struct TrainedClassifier {
    uint32_t classes = 0;
    uint32_t dim = 0;
    std::vector<double> weights;  // one (dim+1) row for plain binary, else one per class
    std::vector<double> mean, scale;

    double binary_score(std::span<const float> x) const;          // logit
    std::vector<double> class_scores(std::span<const float> x) const;
    uint32_t predict(std::span<const float> x) const;
};

/// Full-batch gradient descent with Nesterov momentum; the step size comes
/// from a smoothness bound on the (standardized) design matrix. num_classes
/// == 2 fits a single logistic; > 2 fits a softmax.
TrainedClassifier train_classifier(std::span<const float> x, uint32_t rows, uint32_t dim,
                                   std::span<const uint32_t> y, uint32_t num_classes,
                                   const ClassifierConfig& config = {});

/// Independent binary logistic per class over label sets (multilabel).
TrainedClassifier train_one_vs_rest(std::span<const float> x, uint32_t rows, uint32_t dim,
                                    std::span<const std::vector<uint32_t>> label_sets,
                                    uint32_t num_classes, const ClassifierConfig& config = {});

double binary_f1(std::span<const uint8_t> y_true, std::span<const uint8_t> y_pred);
/// Pooled F1 over (row, label) pairs: 2TP / (2TP + FP + FN).
double micro_f1(std::span<const std::vector<uint32_t>> true_sets,
                std::span<const std::vector<uint32_t>> pred_sets);
/// Rank-based AUC; tied scores contribute half weight.
double auc(std::span<const double> scores, std::span<const uint8_t> labels);

namespace detail {
/// Mean logistic loss over augmented rows (bias column included in dim_aug)
/// with labels z in {-1, +1}, plus 0.5 * l2 * |w|^2 excluding the bias.
/// grad receives the full gradient. Exact double math for gradient checks.
double logistic_loss_grad(std::span<const double> w, const double* x, uint32_t rows,
                          uint32_t dim_aug, std::span<const int8_t> z, double l2,
                          std::span<double> grad);
/// Mean cross-entropy for softmax weights (classes x dim_aug, row-major).
double softmax_loss_grad(std::span<const double> w, const double* x, uint32_t rows,
                         uint32_t dim_aug, std::span<const uint32_t> y, uint32_t classes,
                         double l2, std::span<double> grad);
}  // namespace detail

struct TaskResult {
    std::string task;
    std::string metric;
    double value = 0.0;
    uint64_t train_size = 0;
    uint64_t test_size = 0;
};

struct EvalConfig {
    uint64_t num_pairs = 20000;  // 0 = exhaustive balanced
    PairOp pair_op = PairOp::hadamard;
    double test_fraction = 0.2;
    uint64_t seed = 1;
    ClassifierConfig clf{};
};

/// Same-group-or-not pair classification; reports f1 and auc under task_name.
std::vector<TaskResult> eval_pairwise_binary(const EmbeddingMatrix& emb,
                                             const NodeGrouping& grouping,
                                             const std::string& task_name,
                                             const EvalConfig& config);
/// Node classification over a partition; reports micro_f1 (== accuracy).
std::vector<TaskResult> eval_multiclass(const EmbeddingMatrix& emb, const NodeGrouping& grouping,
                                        const std::string& task_name, const EvalConfig& config);
/// Multilabel node classification; each test row predicts as many labels as
/// it truly has (top scores win); reports micro_f1.
std::vector<TaskResult> eval_multilabel(const EmbeddingMatrix& emb, const NodeGrouping& grouping,
                                        const std::string& task_name, const EvalConfig& config);

struct LinkPredictionConfig {
    double test_fraction = 0.2;      // share of edges held out
    uint64_t max_train_pairs = 50000;  // cap per class on training pairs
    PairOp pair_op = PairOp::hadamard;
    uint64_t seed = 1;
    ClassifierConfig clf{};
};

/// Holds out edges (never isolating a node), retrains walks + embeddings on
/// the residual graph, fits a logistic on residual-edge vs non-edge features,
/// and reports auc on the held-out edges against fresh non-edges.
TaskResult link_prediction_eval(const Graph& graph, const WalkConfig& walk_config,
                                const TrainConfig& train_config,
                                const LinkPredictionConfig& config);

}  // namespace embeval
