#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "embeval/graph.hpp"
#include "embeval/walks.hpp"

namespace embeval {

struct TrainConfig {
    uint32_t dim = 128;
    uint32_t window = 10;
    uint32_t negatives = 5;
    uint32_t epochs = 5;
    double lr = 0.025;
    double min_lr = 1e-4;
    double noise_exponent = 0.75;  // unigram smoothing for negative draws
    double subsample = 0;          // 0 disables frequent-token downsampling
    bool dynamic_window = true;    // shrink half-window uniformly to 1..window
    unsigned workers = 1;          // 1 = bit-reproducible
    uint64_t seed = 1;
};

/// Token table over a corpus: entries sorted by token id ascending, so when
/// the corpus covers every node 0..N-1 the vocab index equals the node id.
struct Vocab {
    std::vector<uint32_t> tokens;   // vocab index -> token id, ascending
    std::vector<uint64_t> counts;   // same order
    std::vector<int32_t> index_of;  // token id -> vocab index, -1 if absent
    uint64_t total_count = 0;

    size_t size() const { return tokens.size(); }
};

Vocab build_vocab(const WalkCorpus& corpus);

/// Walker-alias sampler over counts^exponent. next(rng_state) advances the
/// state (splitmix64) and returns a vocab index.
class NoiseSampler {
public:
    NoiseSampler(std::span<const uint64_t> counts, double exponent);
    uint32_t next(uint64_t& rng_state) const;
    double probability(uint32_t idx) const;  // normalized mass of idx

private:
    std::vector<double> prob_;
    std::vector<uint32_t> alias_;
    std::vector<double> mass_;  // normalized, for probability()
};

struct SgnsGrads {
    std::vector<double> d_center;
    std::vector<double> d_context;
    std::vector<std::vector<double>> d_negatives;
};

/// Loss and exact gradients for one training instance:
///   L = -log s(u.v) - sum_n log s(-u.v_n),  s = logistic sigmoid.
/// Computed in double precision; the trainer itself uses the customary
/// lookup-table sigmoid, so this is the reference for gradient checks.
double sgns_loss_and_grads(std::span<const double> center, std::span<const double> context,
                           std::span<const std::vector<double>> negatives, SgnsGrads& out);

struct EmbeddingMatrix {
    uint32_t rows = 0;
    uint32_t dim = 0;
    std::vector<uint32_t> tokens;  // row -> token id, ascending
    std::vector<float> data;       // rows * dim, row-major

    std::span<float> row(uint32_t r) { return {data.data() + size_t(r) * dim, dim}; }
    std::span<const float> row(uint32_t r) const { return {data.data() + size_t(r) * dim, dim}; }
};

struct TrainStats {
    std::vector<double> epoch_losses;   // mean per trained pair
    std::vector<uint64_t> epoch_pairs;  // (center, context) updates per epoch
};

/// Skip-gram with negative sampling over the walk corpus. Input vectors start
/// uniform in [-0.5/dim, 0.5/dim], context vectors at zero; the learning rate
/// decays linearly from lr to min_lr over epochs * total_tokens centers.
/// workers > 1 updates lock-free (hogwild); workers = 1 is deterministic.
EmbeddingMatrix train_sgns(const WalkCorpus& corpus, const TrainConfig& config,
                           TrainStats* stats = nullptr);

/// Storage-order shim: scoring code indexes rows by node id, so embeddings
/// whose rows arrive shuffled (tokens a permutation of 0..rows-1) are
/// reordered into `scratch` first; identity storage passes through untouched.
/// Non-permutation token sets are a DataError.
const EmbeddingMatrix& canonical_rows(const EmbeddingMatrix& emb, EmbeddingMatrix& scratch);

/// Text format: header `N D`, then one `name v1 .. vD` line per row (%.9g).
/// A raw float32 little-endian sidecar goes to path + ".bin" (u32 rows,
/// u32 dim, then the matrix) for lossless round-trips.
void write_embedding(const EmbeddingMatrix& emb, const IdMap& ids, const std::string& path);

struct EmbeddingLoad {
    EmbeddingMatrix emb;  // tokens = 0..N-1 in file order
    IdMap ids;
};
EmbeddingLoad read_embedding(std::istream& in);
EmbeddingLoad read_embedding_file(const std::string& path);

}  // namespace embeval
