#include "embeval/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "embeval/common.hpp"

namespace embeval {

PairOp pair_op_from_string(const std::string& s) {
    if (s == "hadamard") return PairOp::hadamard;
    if (s == "average") return PairOp::average;
    if (s == "concat") return PairOp::concat;
    if (s == "abs_diff") return PairOp::abs_diff;
    throw DataError("unknown pair op: " + s + " (want hadamard|average|concat|abs_diff)");
}

std::string to_string(PairOp op) {
    switch (op) {
        case PairOp::hadamard: return "hadamard";
        case PairOp::average: return "average";
        case PairOp::concat: return "concat";
        case PairOp::abs_diff: return "abs_diff";
    }
    return "?";
}

std::vector<float> pair_features(const EmbeddingMatrix& emb, uint32_t u, uint32_t v, PairOp op) {
    auto a = emb.row(std::min(u, v));
    auto b = emb.row(std::max(u, v));
    std::vector<float> out;
    switch (op) {
        case PairOp::hadamard:
            out.resize(emb.dim);
            for (uint32_t i = 0; i < emb.dim; ++i) out[i] = a[i] * b[i];
            break;
        case PairOp::average:
            out.resize(emb.dim);
            for (uint32_t i = 0; i < emb.dim; ++i) out[i] = 0.5f * (a[i] + b[i]);
            break;
        case PairOp::concat:
            out.reserve(2 * emb.dim);
            out.insert(out.end(), a.begin(), a.end());
            out.insert(out.end(), b.begin(), b.end());
            break;
        case PairOp::abs_diff:
            out.resize(emb.dim);
            for (uint32_t i = 0; i < emb.dim; ++i) out[i] = std::abs(a[i] - b[i]);
            break;
    }
    return out;
}

namespace {

uint64_t pair_key(uint32_t u, uint32_t v) { return (static_cast<uint64_t>(u) << 32) | v; }

}  // namespace

PairDataset build_pair_dataset(const NodeGrouping& grouping, uint64_t num_pairs, uint64_t seed) {
    const uint32_t n = grouping.num_nodes;
    if (n < 2) throw DataError("pair dataset needs at least two nodes");
    const uint64_t total_pairs = static_cast<uint64_t>(n) * (n - 1) / 2;

    PairDataset ds;
    uint64_t state = mix_seed(seed, fnv1a64("pair-dataset"));

    // Small pair space (or exhaustive request): enumerate, then subsample.
    if (num_pairs == 0 || total_pairs <= (1u << 20)) {
        if (num_pairs == 0 && total_pairs > (1u << 22))
            throw DataError("exhaustive pair enumeration too large; pass num_pairs > 0");
        std::vector<std::pair<uint32_t, uint32_t>> pos, neg;
        for (uint32_t u = 0; u < n; ++u)
            for (uint32_t v = u + 1; v < n; ++v)
                (grouping.same_group(u, v) ? pos : neg).emplace_back(u, v);

        uint64_t need_pos, need_neg;
        if (num_pairs == 0) {
            need_pos = need_neg = std::min(pos.size(), neg.size());
            if (need_pos == 0)
                throw DataError("grouping yields no " +
                                std::string(pos.empty() ? "same-group" : "cross-group") +
                                " pairs");
        } else {
            need_pos = num_pairs / 2;
            need_neg = num_pairs - need_pos;
            if (need_pos > pos.size())
                throw DataError("asked for " + std::to_string(need_pos) +
                                " same-group pairs but only " + std::to_string(pos.size()) +
                                " exist");
            if (need_neg > neg.size())
                throw DataError("asked for " + std::to_string(need_neg) +
                                " cross-group pairs but only " + std::to_string(neg.size()) +
                                " exist");
        }
        seeded_shuffle(pos, mix_seed(state, 1));
        seeded_shuffle(neg, mix_seed(state, 2));
        pos.resize(need_pos);
        neg.resize(need_neg);
        for (auto& p : pos) {
            ds.pairs.push_back(p);
            ds.labels.push_back(1);
        }
        for (auto& p : neg) {
            ds.pairs.push_back(p);
            ds.labels.push_back(0);
        }
        ds.positives = need_pos;
        return ds;
    }

    const uint64_t need_pos = num_pairs / 2;
    const uint64_t need_neg = num_pairs - need_pos;

    // Positives come from a group-weighted draw (groups weighted by their
    // number of internal pairs), so sparse groupings still sample fast.
    std::vector<double> cum;
    cum.reserve(grouping.num_groups);
    double total_mass = 0;
    for (uint32_t g = 0; g < grouping.num_groups; ++g) {
        double s = static_cast<double>(grouping.members[g].size());
        total_mass += s * (s - 1) / 2.0;
        cum.push_back(total_mass);
    }
    if (grouping.kind == GroupingKind::partition) {
        // With disjoint groups the pair counts are exact; fail crisply.
        if (static_cast<double>(need_pos) > total_mass)
            throw DataError("asked for " + std::to_string(need_pos) +
                            " same-group pairs but only " +
                            std::to_string(static_cast<uint64_t>(total_mass)) + " exist");
        double total_neg = static_cast<double>(total_pairs) - total_mass;
        if (static_cast<double>(need_neg) > total_neg)
            throw DataError("asked for " + std::to_string(need_neg) +
                            " cross-group pairs but only " +
                            std::to_string(static_cast<uint64_t>(total_neg)) + " exist");
    }
    if (total_mass <= 0) throw DataError("grouping yields no same-group pairs");

    std::unordered_set<uint64_t> seen;
    seen.reserve(2 * (need_pos + need_neg));
    uint64_t attempts = 0;
    const uint64_t max_attempts = 1000 + 200 * (need_pos + need_neg);

    while (ds.positives < need_pos) {
        if (++attempts > max_attempts)
            throw DataError("could not sample enough distinct same-group pairs");
        double r = static_cast<double>(splitmix64_next(state) >> 11) * 0x1.0p-53 * total_mass;
        uint32_t g = static_cast<uint32_t>(
            std::upper_bound(cum.begin(), cum.end(), r) - cum.begin());
        if (g >= grouping.num_groups) g = grouping.num_groups - 1;
        const auto& members = grouping.members[g];
        uint32_t i = static_cast<uint32_t>(splitmix64_next(state) % members.size());
        uint32_t j = static_cast<uint32_t>(splitmix64_next(state) % (members.size() - 1));
        if (j >= i) ++j;
        uint32_t u = std::min(members[i], members[j]), v = std::max(members[i], members[j]);
        if (!seen.insert(pair_key(u, v)).second) continue;
        ds.pairs.emplace_back(u, v);
        ds.labels.push_back(1);
        ++ds.positives;
    }

    attempts = 0;
    uint64_t negatives = 0;
    while (negatives < need_neg) {
        if (++attempts > max_attempts)
            throw DataError("could not sample enough distinct cross-group pairs");
        uint32_t u = static_cast<uint32_t>(splitmix64_next(state) % n);
        uint32_t v = static_cast<uint32_t>(splitmix64_next(state) % n);
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        if (grouping.same_group(u, v)) continue;
        if (!seen.insert(pair_key(u, v)).second) continue;
        ds.pairs.emplace_back(u, v);
        ds.labels.push_back(0);
        ++negatives;
    }
    return ds;
}

Split stratified_split(std::span<const uint32_t> y, double test_fraction, uint64_t seed) {
    if (test_fraction <= 0 || test_fraction >= 1)
        throw DataError("test fraction must be in (0, 1)");
    uint32_t num_classes = 0;
    for (uint32_t v : y) num_classes = std::max(num_classes, v + 1);
    std::vector<std::vector<uint32_t>> per_class(num_classes);
    for (uint32_t i = 0; i < y.size(); ++i) per_class[y[i]].push_back(i);

    Split split;
    uint64_t state = mix_seed(seed, fnv1a64("split"));
    for (uint32_t c = 0; c < num_classes; ++c) {
        auto& rows = per_class[c];
        if (rows.empty()) continue;
        seeded_shuffle(rows, splitmix64_next(state));
        uint64_t n_test = 0;
        if (rows.size() >= 2) {
            n_test = static_cast<uint64_t>(std::llround(test_fraction * rows.size()));
            n_test = std::clamp<uint64_t>(n_test, 1, rows.size() - 1);
        }
        for (size_t i = 0; i < rows.size(); ++i)
            (i < n_test ? split.test : split.train).push_back(rows[i]);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

Split random_split(uint32_t rows, double test_fraction, uint64_t seed) {
    if (test_fraction <= 0 || test_fraction >= 1)
        throw DataError("test fraction must be in (0, 1)");
    std::vector<uint32_t> order(rows);
    std::iota(order.begin(), order.end(), 0);
    seeded_shuffle(order, mix_seed(seed, fnv1a64("split")));
    Split split;
    uint64_t n_test = 0;
    if (rows >= 2) {
        n_test = static_cast<uint64_t>(std::llround(test_fraction * rows));
        n_test = std::clamp<uint64_t>(n_test, 1, rows - 1);
    }
    for (uint32_t i = 0; i < rows; ++i)
        (i < n_test ? split.test : split.train).push_back(order[i]);
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

namespace detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double logistic_loss_grad(std::span<const double> w, const double* x, uint32_t rows,
                          uint32_t dim_aug, std::span<const int8_t> z, double l2,
                          std::span<double> grad) {
    Eigen::Map<const RowMat> X(x, rows, dim_aug);
    Eigen::Map<const Eigen::VectorXd> wv(w.data(), dim_aug);
    Eigen::Map<Eigen::VectorXd> gv(grad.data(), dim_aug);

    Eigen::VectorXd s = X * wv;
    double loss = 0;
    Eigen::VectorXd f(rows);
    for (uint32_t i = 0; i < rows; ++i) {
        double t = -static_cast<double>(z[i]) * s[i];
        loss += t > 35 ? t : std::log1p(std::exp(t));
        // d/ds of log(1 + exp(-z s)) = -z * sigmoid(-z s)
        f[i] = -static_cast<double>(z[i]) / (1.0 + std::exp(-t));
    }
    loss /= rows;
    gv = X.transpose() * f / static_cast<double>(rows);
    for (uint32_t j = 0; j + 1 < dim_aug; ++j) {  // bias unregularized
        loss += 0.5 * l2 * w[j] * w[j];
        gv[j] += l2 * w[j];
    }
    return loss;
}

double softmax_loss_grad(std::span<const double> w, const double* x, uint32_t rows,
                         uint32_t dim_aug, std::span<const uint32_t> y, uint32_t classes,
                         double l2, std::span<double> grad) {
    Eigen::Map<const RowMat> X(x, rows, dim_aug);
    Eigen::Map<const RowMat> W(w.data(), classes, dim_aug);
    Eigen::Map<RowMat> G(grad.data(), classes, dim_aug);

    RowMat S = X * W.transpose();  // rows x classes
    double loss = 0;
    for (uint32_t i = 0; i < rows; ++i) {
        double mx = S.row(i).maxCoeff();
        double lse = 0;
        for (uint32_t c = 0; c < classes; ++c) lse += std::exp(S(i, c) - mx);
        lse = mx + std::log(lse);
        loss += lse - S(i, y[i]);
        for (uint32_t c = 0; c < classes; ++c)
            S(i, c) = std::exp(S(i, c) - lse);  // reuse S as the probabilities
        S(i, y[i]) -= 1.0;
    }
    loss /= rows;
    G = S.transpose() * X / static_cast<double>(rows);
    for (uint32_t c = 0; c < classes; ++c) {
        for (uint32_t j = 0; j + 1 < dim_aug; ++j) {
            loss += 0.5 * l2 * W(c, j) * W(c, j);
            G(c, j) += l2 * W(c, j);
        }
    }
    return loss;
}

}  // namespace detail

namespace {

struct Standardizer {
    std::vector<double> mean, scale;
};

// Fit on the training rows; zero-variance features pass through unscaled.
Standardizer fit_standardizer(std::span<const float> x, uint32_t rows, uint32_t dim) {
    Standardizer st;
    st.mean.assign(dim, 0.0);
    st.scale.assign(dim, 1.0);
    if (rows == 0) return st;
    for (uint32_t i = 0; i < rows; ++i)
        for (uint32_t j = 0; j < dim; ++j) st.mean[j] += x[size_t(i) * dim + j];
    for (double& m : st.mean) m /= rows;
    std::vector<double> var(dim, 0.0);
    for (uint32_t i = 0; i < rows; ++i)
        for (uint32_t j = 0; j < dim; ++j) {
            double d = x[size_t(i) * dim + j] - st.mean[j];
            var[j] += d * d;
        }
    for (uint32_t j = 0; j < dim; ++j) {
        double sd = std::sqrt(var[j] / rows);
        st.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    return st;
}

// Standardized features plus a trailing bias-1 column, in double.
std::vector<double> augment(std::span<const float> x, uint32_t rows, uint32_t dim,
                            const Standardizer& st) {
    std::vector<double> xa(size_t(rows) * (dim + 1));
    for (uint32_t i = 0; i < rows; ++i) {
        for (uint32_t j = 0; j < dim; ++j)
            xa[size_t(i) * (dim + 1) + j] =
                (x[size_t(i) * dim + j] - st.mean[j]) / st.scale[j];
        xa[size_t(i) * (dim + 1) + dim] = 1.0;
    }
    return xa;
}

double frobenius_sq(const std::vector<double>& xa) {
    double s = 0;
    for (double v : xa) s += v * v;
    return s;
}

// Nesterov-accelerated full-batch descent over an arbitrary loss closure.
template <class LossGrad>
void descend(std::vector<double>& w, const ClassifierConfig& cfg, double lipschitz,
             LossGrad&& loss_grad) {
    const double lr = 1.0 / lipschitz;
    const double mu = 0.9;
    std::vector<double> v(w.size(), 0.0), look(w.size()), grad(w.size());
    for (uint32_t it = 0; it < cfg.max_iters; ++it) {
        for (size_t i = 0; i < w.size(); ++i) look[i] = w[i] + mu * v[i];
        loss_grad(look, grad);
        double gmax = 0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));
        if (gmax < cfg.tol) {
            w = look;
            break;
        }
        for (size_t i = 0; i < w.size(); ++i) {
            v[i] = mu * v[i] - lr * grad[i];
            w[i] += v[i];
        }
    }
}

}  // namespace

double TrainedClassifier::binary_score(std::span<const float> x) const {
    double s = weights[dim];  // bias
    for (uint32_t j = 0; j < dim; ++j) s += weights[j] * (x[j] - mean[j]) / scale[j];
    return s;
}

std::vector<double> TrainedClassifier::class_scores(std::span<const float> x) const {
    uint32_t k = static_cast<uint32_t>(weights.size() / (dim + 1));
    std::vector<double> out(k);
    for (uint32_t c = 0; c < k; ++c) {
        const double* w = weights.data() + size_t(c) * (dim + 1);
        double s = w[dim];
        for (uint32_t j = 0; j < dim; ++j) s += w[j] * (x[j] - mean[j]) / scale[j];
        out[c] = s;
    }
    return out;
}

uint32_t TrainedClassifier::predict(std::span<const float> x) const {
    if (weights.size() == size_t(dim) + 1) return binary_score(x) > 0 ? 1 : 0;
    auto s = class_scores(x);
    return static_cast<uint32_t>(std::max_element(s.begin(), s.end()) - s.begin());
}

TrainedClassifier train_classifier(std::span<const float> x, uint32_t rows, uint32_t dim,
                                   std::span<const uint32_t> y, uint32_t num_classes,
                                   const ClassifierConfig& config) {
    if (num_classes < 2) throw DataError("classifier needs at least two classes");
    if (rows == 0) throw DataError("classifier needs training rows");
    if (y.size() != rows) throw DataError("label count does not match row count");
    for (uint32_t v : y)
        if (v >= num_classes) throw DataError("label out of range");

    Standardizer st = fit_standardizer(x, rows, dim);
    std::vector<double> xa = augment(x, rows, dim, st);
    const uint32_t da = dim + 1;

    TrainedClassifier model;
    model.classes = num_classes;
    model.dim = dim;
    model.mean = st.mean;
    model.scale = st.scale;

    if (num_classes == 2) {
        std::vector<int8_t> z(rows);
        for (uint32_t i = 0; i < rows; ++i) z[i] = y[i] ? 1 : -1;
        model.weights.assign(da, 0.0);
        double L = frobenius_sq(xa) / (4.0 * rows) + config.l2;
        descend(model.weights, config, L,
                [&](const std::vector<double>& w, std::vector<double>& g) {
                    return detail::logistic_loss_grad(w, xa.data(), rows, da, z, config.l2, g);
                });
    } else {
        model.weights.assign(size_t(num_classes) * da, 0.0);
        double L = frobenius_sq(xa) / (2.0 * rows) + config.l2;
        descend(model.weights, config, L,
                [&](const std::vector<double>& w, std::vector<double>& g) {
                    return detail::softmax_loss_grad(w, xa.data(), rows, da, y, num_classes,
                                                     config.l2, g);
                });
    }
    return model;
}

TrainedClassifier train_one_vs_rest(std::span<const float> x, uint32_t rows, uint32_t dim,
                                    std::span<const std::vector<uint32_t>> label_sets,
                                    uint32_t num_classes, const ClassifierConfig& config) {
    if (num_classes < 1) throw DataError("one-vs-rest needs at least one class");
    if (rows == 0) throw DataError("classifier needs training rows");
    if (label_sets.size() != rows) throw DataError("label count does not match row count");

    Standardizer st = fit_standardizer(x, rows, dim);
    std::vector<double> xa = augment(x, rows, dim, st);
    const uint32_t da = dim + 1;

    TrainedClassifier model;
    model.classes = num_classes;
    model.dim = dim;
    model.mean = st.mean;
    model.scale = st.scale;
    model.weights.assign(size_t(num_classes) * da, 0.0);

    double L = frobenius_sq(xa) / (4.0 * rows) + config.l2;
    std::vector<int8_t> z(rows);
    std::vector<double> w(da);
    for (uint32_t c = 0; c < num_classes; ++c) {
        for (uint32_t i = 0; i < rows; ++i)
            z[i] = std::binary_search(label_sets[i].begin(), label_sets[i].end(), c) ? 1 : -1;
        std::fill(w.begin(), w.end(), 0.0);
        descend(w, config, L, [&](const std::vector<double>& wv, std::vector<double>& g) {
            return detail::logistic_loss_grad(wv, xa.data(), rows, da, z, config.l2, g);
        });
        std::copy(w.begin(), w.end(), model.weights.begin() + size_t(c) * da);
    }
    return model;
}

double binary_f1(std::span<const uint8_t> y_true, std::span<const uint8_t> y_pred) {
    if (y_true.size() != y_pred.size()) throw DataError("prediction count mismatch");
    uint64_t tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < y_true.size(); ++i) {
        if (y_pred[i] && y_true[i]) ++tp;
        else if (y_pred[i] && !y_true[i]) ++fp;
        else if (!y_pred[i] && y_true[i]) ++fn;
    }
    uint64_t denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * tp / static_cast<double>(denom);
}

double micro_f1(std::span<const std::vector<uint32_t>> true_sets,
                std::span<const std::vector<uint32_t>> pred_sets) {
    if (true_sets.size() != pred_sets.size()) throw DataError("prediction count mismatch");
    uint64_t tp = 0, fp = 0, fn = 0;
    std::vector<uint32_t> a, b;
    for (size_t i = 0; i < true_sets.size(); ++i) {
        a = true_sets[i];
        b = pred_sets[i];
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::vector<uint32_t> inter;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
        tp += inter.size();
        fp += b.size() - inter.size();
        fn += a.size() - inter.size();
    }
    uint64_t denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * tp / static_cast<double>(denom);
}

double auc(std::span<const double> scores, std::span<const uint8_t> labels) {
    if (scores.size() != labels.size()) throw DataError("score count mismatch");
    uint64_t pos = 0;
    for (uint8_t l : labels) pos += l ? 1 : 0;
    uint64_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw DataError("AUC needs both classes present");

    std::vector<uint32_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](uint32_t a, uint32_t b) { return scores[a] < scores[b]; });

    // Average ranks across tied scores (1-based), sum over positives.
    double rank_sum = 0;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k < j; ++k)
            if (labels[order[k]]) rank_sum += avg_rank;
        i = j;
    }
    return (rank_sum - static_cast<double>(pos) * (pos + 1) / 2.0) /
           (static_cast<double>(pos) * static_cast<double>(neg));
}

namespace {

// Gather selected rows of a flat row-major matrix.
std::vector<float> gather_rows(std::span<const float> x, uint32_t dim,
                               std::span<const uint32_t> rows) {
    std::vector<float> out(rows.size() * size_t(dim));
    for (size_t i = 0; i < rows.size(); ++i)
        std::copy_n(x.data() + size_t(rows[i]) * dim, dim, out.data() + i * dim);
    return out;
}

}  // namespace

std::vector<TaskResult> eval_pairwise_binary(const EmbeddingMatrix& emb_in,
                                             const NodeGrouping& grouping,
                                             const std::string& task_name,
                                             const EvalConfig& config) {
    EmbeddingMatrix reordered;
    const EmbeddingMatrix& emb = canonical_rows(emb_in, reordered);
    if (grouping.num_nodes != emb.rows)
        throw DataError("grouping does not cover the embedding rows");
    PairDataset ds =
        build_pair_dataset(grouping, config.num_pairs, mix_seed(config.seed, fnv1a64("pairs")));

    const uint32_t fdim = ds.pairs.empty()
                              ? emb.dim
                              : static_cast<uint32_t>(
                                    pair_features(emb, ds.pairs[0].first, ds.pairs[0].second,
                                                  config.pair_op)
                                        .size());
    std::vector<float> feats(ds.pairs.size() * size_t(fdim));
    for (size_t i = 0; i < ds.pairs.size(); ++i) {
        auto f = pair_features(emb, ds.pairs[i].first, ds.pairs[i].second, config.pair_op);
        std::copy(f.begin(), f.end(), feats.begin() + i * fdim);
    }
    std::vector<uint32_t> y(ds.labels.begin(), ds.labels.end());

    Split split = stratified_split(y, config.test_fraction, config.seed);
    std::vector<float> xtr = gather_rows(feats, fdim, split.train);
    std::vector<uint32_t> ytr;
    for (uint32_t r : split.train) ytr.push_back(y[r]);

    TrainedClassifier clf = train_classifier(xtr, static_cast<uint32_t>(split.train.size()),
                                             fdim, ytr, 2, config.clf);

    std::vector<uint8_t> yte, pred;
    std::vector<double> scores;
    for (uint32_t r : split.test) {
        std::span<const float> row(feats.data() + size_t(r) * fdim, fdim);
        double s = clf.binary_score(row);
        scores.push_back(s);
        pred.push_back(s > 0 ? 1 : 0);
        yte.push_back(ds.labels[r]);
    }

    std::vector<TaskResult> out;
    out.push_back({task_name, "f1", binary_f1(yte, pred), split.train.size(), split.test.size()});
    out.push_back({task_name, "auc", auc(scores, yte), split.train.size(), split.test.size()});
    return out;
}

std::vector<TaskResult> eval_multiclass(const EmbeddingMatrix& emb_in, const NodeGrouping& grouping,
                                        const std::string& task_name, const EvalConfig& config) {
    if (grouping.kind != GroupingKind::partition)
        throw DataError("multiclass evaluation needs a partition grouping");
    EmbeddingMatrix reordered;
    const EmbeddingMatrix& emb = canonical_rows(emb_in, reordered);
    if (grouping.num_nodes != emb.rows)
        throw DataError("grouping does not cover the embedding rows");
    if (grouping.num_groups < 2) throw DataError("multiclass needs at least two groups");

    Split split = stratified_split(grouping.partition, config.test_fraction, config.seed);
    std::vector<float> xtr = gather_rows(emb.data, emb.dim, split.train);
    std::vector<uint32_t> ytr;
    for (uint32_t r : split.train) ytr.push_back(grouping.partition[r]);

    TrainedClassifier clf =
        train_classifier(xtr, static_cast<uint32_t>(split.train.size()), emb.dim, ytr,
                         grouping.num_groups, config.clf);

    uint64_t correct = 0;
    for (uint32_t r : split.test)
        if (clf.predict(emb.row(r)) == grouping.partition[r]) ++correct;
    double acc = split.test.empty() ? 0.0 : static_cast<double>(correct) / split.test.size();

    // Single-label micro-F1 pools to plain accuracy; keep the metric name
    // uniform across classification tasks.
    return {{task_name, "micro_f1", acc, split.train.size(), split.test.size()}};
}

std::vector<TaskResult> eval_multilabel(const EmbeddingMatrix& emb_in, const NodeGrouping& grouping,
                                        const std::string& task_name, const EvalConfig& config) {
    EmbeddingMatrix reordered;
    const EmbeddingMatrix& emb = canonical_rows(emb_in, reordered);
    if (grouping.num_nodes != emb.rows)
        throw DataError("grouping does not cover the embedding rows");

    // Only rows with at least one label take part.
    std::vector<uint32_t> labeled;
    for (uint32_t v = 0; v < grouping.num_nodes; ++v)
        if (!grouping.groups_of(v).empty()) labeled.push_back(v);
    if (labeled.size() < 2) throw DataError("multilabel evaluation needs labeled nodes");

    Split split = random_split(static_cast<uint32_t>(labeled.size()), config.test_fraction,
                               config.seed);
    std::vector<uint32_t> train_nodes, test_nodes;
    for (uint32_t i : split.train) train_nodes.push_back(labeled[i]);
    for (uint32_t i : split.test) test_nodes.push_back(labeled[i]);

    std::vector<float> xtr = gather_rows(emb.data, emb.dim, train_nodes);
    std::vector<std::vector<uint32_t>> ltr;
    for (uint32_t v : train_nodes) {
        auto g = grouping.groups_of(v);
        ltr.emplace_back(g.begin(), g.end());
    }

    TrainedClassifier clf =
        train_one_vs_rest(xtr, static_cast<uint32_t>(train_nodes.size()), emb.dim, ltr,
                          grouping.num_groups, config.clf);

    // Standard protocol: each test node predicts exactly as many labels as
    // it truly has, taking the highest-scoring classes.
    std::vector<std::vector<uint32_t>> truth, preds;
    std::vector<uint32_t> idx(grouping.num_groups);
    for (uint32_t v : test_nodes) {
        auto g = grouping.groups_of(v);
        truth.emplace_back(g.begin(), g.end());
        auto scores = clf.class_scores(emb.row(v));
        std::iota(idx.begin(), idx.end(), 0);
        size_t r = std::min<size_t>(g.size(), idx.size());
        std::partial_sort(idx.begin(), idx.begin() + r, idx.end(), [&](uint32_t a, uint32_t b) {
            return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
        });
        preds.emplace_back(idx.begin(), idx.begin() + r);
    }

    return {{task_name, "micro_f1", micro_f1(truth, preds), train_nodes.size(),
             test_nodes.size()}};
}

TaskResult link_prediction_eval(const Graph& graph, const WalkConfig& walk_config,
                                const TrainConfig& train_config,
                                const LinkPredictionConfig& config) {
    if (config.test_fraction <= 0 || config.test_fraction >= 1)
        throw DataError("test fraction must be in (0, 1)");
    const uint32_t n = graph.num_nodes();
    if (graph.num_edges() < 2) throw DataError("link prediction needs a graph with edges");

    std::vector<std::pair<uint32_t, uint32_t>> edges;
    edges.reserve(graph.num_edges());
    for (uint32_t u = 0; u < n; ++u)
        for (uint32_t v : graph.neighbors(u))
            if (u < v) edges.emplace_back(u, v);

    // Hold out edges in random order, never allowing a node to lose its last
    // incident edge (the residual graph must still reach every node).
    uint64_t target = static_cast<uint64_t>(
        std::llround(config.test_fraction * static_cast<double>(edges.size())));
    seeded_shuffle(edges, mix_seed(config.seed, fnv1a64("lp-remove")));
    std::vector<uint32_t> deg(n);
    for (auto [u, v] : edges) {
        ++deg[u];
        ++deg[v];
    }
    std::vector<std::pair<uint32_t, uint32_t>> removed, kept;
    for (auto [u, v] : edges) {
        if (removed.size() < target && deg[u] > 1 && deg[v] > 1) {
            removed.emplace_back(u, v);
            --deg[u];
            --deg[v];
        } else {
            kept.emplace_back(u, v);
        }
    }
    if (removed.empty()) throw DataError("graph too sparse to hold out any edges");

    Graph residual = Graph::from_edges(n, kept, graph.ids());
    WalkCorpus corpus = generate_walks(residual, walk_config);
    EmbeddingMatrix emb = train_sgns(corpus, train_config);
    if (emb.rows != n) throw DataError("residual embedding does not cover all nodes");

    uint64_t train_pos = std::min<uint64_t>(kept.size(), config.max_train_pairs);
    if (train_pos < kept.size())
        seeded_shuffle(kept, mix_seed(config.seed, fnv1a64("lp-train-cap")));

    // Sampling non-edges against the *original* graph keeps held-out edges
    // out of the negative pools; one draw keeps train and test disjoint.
    uint64_t test_neg = removed.size();
    auto non_edges = sample_non_edges(graph, train_pos + test_neg,
                                      mix_seed(config.seed, fnv1a64("lp-non-edges")));

    const uint32_t fdim = static_cast<uint32_t>(
        pair_features(emb, kept[0].first, kept[0].second, config.pair_op).size());
    std::vector<float> xtr((train_pos * 2) * size_t(fdim));
    std::vector<uint32_t> ytr(train_pos * 2);
    for (uint64_t i = 0; i < train_pos; ++i) {
        auto f = pair_features(emb, kept[i].first, kept[i].second, config.pair_op);
        std::copy(f.begin(), f.end(), xtr.begin() + i * fdim);
        ytr[i] = 1;
    }
    for (uint64_t i = 0; i < train_pos; ++i) {
        auto [u, v] = non_edges[i];
        auto f = pair_features(emb, u, v, config.pair_op);
        std::copy(f.begin(), f.end(), xtr.begin() + (train_pos + i) * fdim);
        ytr[train_pos + i] = 0;
    }

    TrainedClassifier clf = train_classifier(xtr, static_cast<uint32_t>(train_pos * 2), fdim,
                                             ytr, 2, config.clf);

    std::vector<double> scores;
    std::vector<uint8_t> labels;
    for (auto [u, v] : removed) {
        auto f = pair_features(emb, u, v, config.pair_op);
        scores.push_back(clf.binary_score(f));
        labels.push_back(1);
    }
    for (uint64_t i = train_pos; i < non_edges.size(); ++i) {
        auto f = pair_features(emb, non_edges[i].first, non_edges[i].second, config.pair_op);
        scores.push_back(clf.binary_score(f));
        labels.push_back(0);
    }

    return {"link_prediction", "auc", auc(scores, labels), train_pos * 2,
            removed.size() + test_neg};
}

}  // namespace embeval
