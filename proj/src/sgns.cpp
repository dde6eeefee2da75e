#include "embeval/sgns.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <thread>

#include "embeval/common.hpp"

namespace embeval {

Vocab build_vocab(const WalkCorpus& corpus) {
    Vocab v;
    uint32_t max_tok = 0;
    for (uint32_t t : corpus.tokens) max_tok = std::max(max_tok, t);
    std::vector<uint64_t> counts(corpus.tokens.empty() ? 0 : size_t(max_tok) + 1, 0);
    for (uint32_t t : corpus.tokens) ++counts[t];

    v.index_of.assign(counts.size(), -1);
    for (uint32_t t = 0; t < counts.size(); ++t) {
        if (counts[t] == 0) continue;
        v.index_of[t] = static_cast<int32_t>(v.tokens.size());
        v.tokens.push_back(t);
        v.counts.push_back(counts[t]);
        v.total_count += counts[t];
    }
    return v;
}

NoiseSampler::NoiseSampler(std::span<const uint64_t> counts, double exponent) {
    size_t n = counts.size();
    if (n == 0) throw DataError("noise distribution over empty vocab");
    mass_.resize(n);
    double z = 0;
    for (size_t i = 0; i < n; ++i) {
        mass_[i] = std::pow(static_cast<double>(counts[i]), exponent);
        z += mass_[i];
    }
    if (z <= 0) throw DataError("noise distribution has zero total mass");
    for (double& m : mass_) m /= z;

    // Walker alias construction over the normalized masses.
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<uint32_t> small, large;
    for (size_t i = 0; i < n; ++i) {
        scaled[i] = mass_[i] * static_cast<double>(n);
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        uint32_t s = small.back(), l = large.back();
        small.pop_back();
        large.pop_back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (uint32_t s : small) prob_[s] = 1.0;
    for (uint32_t l : large) prob_[l] = 1.0;
}

uint32_t NoiseSampler::next(uint64_t& rng_state) const {
    uint64_t r = splitmix64_next(rng_state);
    size_t n = prob_.size();
    uint32_t col = static_cast<uint32_t>(r % n);
    // Top 53 bits -> uniform double in [0, 1).
    double u = static_cast<double>(r >> 11) * 0x1.0p-53;
    return u < prob_[col] ? col : alias_[col];
}

double NoiseSampler::probability(uint32_t idx) const { return mass_[idx]; }

double sgns_loss_and_grads(std::span<const double> center, std::span<const double> context,
                           std::span<const std::vector<double>> negatives, SgnsGrads& out) {
    size_t d = center.size();
    auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    auto dot = [d](std::span<const double> a, std::span<const double> b) {
        double s = 0;
        for (size_t i = 0; i < d; ++i) s += a[i] * b[i];
        return s;
    };

    out.d_center.assign(d, 0.0);
    out.d_context.assign(d, 0.0);
    out.d_negatives.assign(negatives.size(), std::vector<double>(d, 0.0));

    // Positive term: dL/du += (s(uv) - 1) v, dL/dv = (s(uv) - 1) u.
    double s_pos = sigmoid(dot(center, context));
    double loss = -std::log(s_pos);
    for (size_t i = 0; i < d; ++i) {
        out.d_center[i] += (s_pos - 1.0) * context[i];
        out.d_context[i] = (s_pos - 1.0) * center[i];
    }

    // Each negative contributes -log s(-u.vn): dL/du += s(u.vn) vn.
    for (size_t k = 0; k < negatives.size(); ++k) {
        std::span<const double> vn(negatives[k]);
        double s_neg = sigmoid(dot(center, vn));
        loss -= std::log(1.0 - s_neg);
        for (size_t i = 0; i < d; ++i) {
            out.d_center[i] += s_neg * vn[i];
            out.d_negatives[k][i] = s_neg * center[i];
        }
    }
    return loss;
}

namespace {

constexpr int kExpTableSize = 1000;
constexpr double kMaxExp = 6.0;

struct SigmoidTable {
    double values[kExpTableSize];
    SigmoidTable() {
        for (int i = 0; i < kExpTableSize; ++i) {
            double x = (i / static_cast<double>(kExpTableSize) * 2.0 - 1.0) * kMaxExp;
            double e = std::exp(x);
            values[i] = e / (e + 1.0);
        }
    }
    // Saturates outside (-kMaxExp, kMaxExp); callers handle the hard 0/1 case.
    double operator()(double x) const {
        int i = static_cast<int>((x + kMaxExp) * (kExpTableSize / kMaxExp / 2.0));
        return values[std::clamp(i, 0, kExpTableSize - 1)];
    }
};

uint64_t uniform_below(uint64_t& state, uint64_t n) { return splitmix64_next(state) % n; }

double uniform01(uint64_t& state) {
    return static_cast<double>(splitmix64_next(state) >> 11) * 0x1.0p-53;
}

}  // namespace

EmbeddingMatrix train_sgns(const WalkCorpus& corpus, const TrainConfig& config,
                           TrainStats* stats) {
    if (config.dim == 0) throw DataError("embedding dim must be >= 1");
    if (config.window == 0) throw DataError("window must be >= 1");
    if (config.epochs == 0) throw DataError("epochs must be >= 1");
    if (config.lr <= 0 || config.min_lr <= 0 || config.min_lr > config.lr)
        throw DataError("need lr >= min_lr > 0");
    if (corpus.total_tokens() == 0) throw DataError("empty training corpus");

    Vocab vocab = build_vocab(corpus);
    NoiseSampler noise(vocab.counts, config.noise_exponent);
    static const SigmoidTable sigmoid;

    const uint32_t dim = config.dim;
    const size_t vsize = vocab.size();
    EmbeddingMatrix emb;
    emb.rows = static_cast<uint32_t>(vsize);
    emb.dim = dim;
    emb.tokens = vocab.tokens;
    emb.data.resize(vsize * dim);
    std::vector<float> ctx(vsize * dim, 0.0f);

    uint64_t init_state = mix_seed(config.seed, fnv1a64("init"));
    for (float& x : emb.data)
        x = static_cast<float>((uniform01(init_state) - 0.5) / dim);

    const uint64_t total_centers = uint64_t(config.epochs) * corpus.total_tokens();
    std::atomic<uint64_t> centers_done{0};
    const unsigned workers = std::max(1u, config.workers);
    const uint64_t num_walks = corpus.num_walks();

    if (stats) {
        stats->epoch_losses.assign(config.epochs, 0.0);
        stats->epoch_pairs.assign(config.epochs, 0);
    }

    for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<double> loss_sum(workers, 0.0);
        std::vector<uint64_t> pair_cnt(workers, 0);

        auto work = [&](unsigned wid, uint64_t begin, uint64_t end) {
            uint64_t state = mix_seed(config.seed, epoch, wid);
            std::vector<uint32_t> sent;
            std::vector<float> grad_u(dim);
            double lr = config.lr;
            uint64_t local_centers = 0;

            for (uint64_t w = begin; w < end; ++w) {
                auto walk = corpus.walk(w);
                // Decay covers every raw token, subsampled or not, so the
                // schedule ends at min_lr exactly when subsampling is off.
                uint64_t done = centers_done.fetch_add(walk.size(), std::memory_order_relaxed);
                lr = config.lr -
                     (config.lr - config.min_lr) *
                         (static_cast<double>(done) / static_cast<double>(total_centers));
                if (lr < config.min_lr) lr = config.min_lr;
                sent.clear();
                for (uint32_t tok : walk) {
                    uint32_t vi = static_cast<uint32_t>(vocab.index_of[tok]);
                    if (config.subsample > 0) {
                        double f = static_cast<double>(vocab.counts[vi]) /
                                   static_cast<double>(vocab.total_count);
                        double keep = (std::sqrt(f / config.subsample) + 1.0) *
                                      (config.subsample / f);
                        if (keep < 1.0 && uniform01(state) > keep) continue;
                    }
                    sent.push_back(vi);
                }

                for (size_t pos = 0; pos < sent.size(); ++pos) {
                    ++local_centers;
                    uint32_t half = config.window;
                    if (config.dynamic_window)
                        half = 1 + static_cast<uint32_t>(uniform_below(state, config.window));
                    uint32_t u = sent[pos];
                    float* urow = emb.data.data() + size_t(u) * dim;

                    size_t lo = pos > half ? pos - half : 0;
                    size_t hi = std::min(sent.size() - 1, pos + half);
                    for (size_t cpos = lo; cpos <= hi; ++cpos) {
                        if (cpos == pos) continue;
                        uint32_t c = sent[cpos];
                        std::fill(grad_u.begin(), grad_u.end(), 0.0f);

                        for (uint32_t d = 0; d <= config.negatives; ++d) {
                            uint32_t target;
                            double label;
                            if (d == 0) {
                                target = c;
                                label = 1.0;
                            } else {
                                // Redraw when the noise draw hits the true
                                // context; give up on the slot after a few.
                                target = noise.next(state);
                                int attempts = 0;
                                while (target == c && ++attempts < 16)
                                    target = noise.next(state);
                                if (target == c) continue;
                                label = 0.0;
                            }
                            float* trow = ctx.data() + size_t(target) * dim;
                            double f = 0;
                            for (uint32_t i = 0; i < dim; ++i) f += double(urow[i]) * trow[i];
                            double s = f > kMaxExp ? 1.0 : f < -kMaxExp ? 0.0 : sigmoid(f);
                            double g = (label - s) * lr;
                            for (uint32_t i = 0; i < dim; ++i) {
                                grad_u[i] += static_cast<float>(g) * trow[i];
                                trow[i] += static_cast<float>(g) * urow[i];
                            }
                            // Loss bookkeeping uses the table's saturated
                            // endpoints so it stays finite.
                            double sv = sigmoid(f);
                            loss_sum[wid] -= d == 0 ? std::log(sv) : std::log(1.0 - sv);
                        }
                        for (uint32_t i = 0; i < dim; ++i) urow[i] += grad_u[i];
                        ++pair_cnt[wid];
                    }
                }
            }
            (void)local_centers;
        };

        if (workers == 1) {
            work(0, 0, num_walks);
        } else {
            std::vector<std::thread> pool;
            uint64_t chunk = (num_walks + workers - 1) / workers;
            for (unsigned t = 0; t < workers; ++t) {
                uint64_t b = t * chunk;
                uint64_t e = std::min(num_walks, b + chunk);
                if (b >= e) break;
                pool.emplace_back(work, t, b, e);
            }
            for (auto& th : pool) th.join();
        }

        if (stats) {
            double ls = 0;
            uint64_t pc = 0;
            for (unsigned t = 0; t < workers; ++t) {
                ls += loss_sum[t];
                pc += pair_cnt[t];
            }
            stats->epoch_losses[epoch] = pc ? ls / static_cast<double>(pc) : 0.0;
            stats->epoch_pairs[epoch] = pc;
        }
    }
    return emb;
}

const EmbeddingMatrix& canonical_rows(const EmbeddingMatrix& emb, EmbeddingMatrix& scratch) {
    if (emb.tokens.size() != emb.rows)
        throw DataError("embedding token list does not match its row count");
    bool identity = true;
    for (uint32_t r = 0; r < emb.rows; ++r) {
        if (emb.tokens[r] != r) {
            identity = false;
            break;
        }
    }
    if (identity) return emb;

    scratch.rows = emb.rows;
    scratch.dim = emb.dim;
    scratch.tokens.resize(emb.rows);
    scratch.data.assign(size_t(emb.rows) * emb.dim, 0.0f);
    std::vector<uint8_t> seen(emb.rows, 0);
    for (uint32_t r = 0; r < emb.rows; ++r) {
        uint32_t t = emb.tokens[r];
        if (t >= emb.rows || seen[t])
            throw DataError("embedding tokens are not a permutation of 0..rows-1");
        seen[t] = 1;
        scratch.tokens[t] = t;
        auto src = emb.row(r);
        std::copy(src.begin(), src.end(), scratch.row(t).begin());
    }
    return scratch;
}

void write_embedding(const EmbeddingMatrix& emb, const IdMap& ids, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write embedding file: " + path);
    out << emb.rows << ' ' << emb.dim << '\n';
    char num[64];
    for (uint32_t r = 0; r < emb.rows; ++r) {
        out << ids.name(emb.tokens[r]);
        auto row = emb.row(r);
        for (uint32_t i = 0; i < emb.dim; ++i) {
            std::snprintf(num, sizeof num, "%.9g", double(row[i]));
            out << ' ' << num;
        }
        out << '\n';
    }
    if (!out) throw DataError("short write on embedding file: " + path);

    std::ofstream bin(path + ".bin", std::ios::binary);
    if (!bin) throw DataError("cannot write embedding sidecar: " + path + ".bin");
    bin.write(reinterpret_cast<const char*>(&emb.rows), sizeof emb.rows);
    bin.write(reinterpret_cast<const char*>(&emb.dim), sizeof emb.dim);
    bin.write(reinterpret_cast<const char*>(emb.data.data()),
              static_cast<std::streamsize>(emb.data.size() * sizeof(float)));
}

EmbeddingLoad read_embedding(std::istream& in) {
    EmbeddingLoad load;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty embedding file", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream hdr(line);
    uint64_t rows = 0, dim = 0;
    if (!(hdr >> rows >> dim) || dim == 0)
        throw ParseError("expected `rows dim` header", 1);

    load.emb.rows = static_cast<uint32_t>(rows);
    load.emb.dim = static_cast<uint32_t>(dim);
    load.emb.data.reserve(rows * dim);
    uint64_t line_no = 1;
    for (uint64_t r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) throw ParseError("fewer rows than header claims", line_no);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string name;
        if (!(ls >> name)) throw ParseError("blank embedding row", line_no);
        uint32_t id = load.ids.add(name);
        if (id != r) throw ParseError("duplicate embedding row name: " + name, line_no);
        load.emb.tokens.push_back(id);
        double v;
        uint64_t got = 0;
        while (ls >> v) {
            load.emb.data.push_back(static_cast<float>(v));
            ++got;
        }
        if (got != dim)
            throw ParseError("row has " + std::to_string(got) + " values, expected " +
                                 std::to_string(dim),
                             line_no);
    }
    return load;
}

EmbeddingLoad read_embedding_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embedding file: " + path);
    return read_embedding(in);
}

}  // namespace embeval
