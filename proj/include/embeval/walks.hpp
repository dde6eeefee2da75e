#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "embeval/graph.hpp"

namespace embeval {

struct WalkConfig {
    uint32_t walks_per_node = 80;  // gamma
    uint32_t walk_length = 40;     // t, >= 2
    uint64_t seed = 1;
};

/// Training corpus: flat token buffer with per-walk offsets.
/// Tokens are dense node ids of the source graph.
struct WalkCorpus {
    std::vector<uint32_t> tokens;
    std::vector<uint64_t> offsets{0};  // size num_walks()+1

    uint64_t num_walks() const { return offsets.size() - 1; }
    uint64_t total_tokens() const { return tokens.size(); }
    std::span<const uint32_t> walk(uint64_t i) const {
        return {tokens.data() + offsets[i], tokens.data() + offsets[i + 1]};
    }
    void add_walk(std::span<const uint32_t> w) {
        tokens.insert(tokens.end(), w.begin(), w.end());
        offsets.push_back(tokens.size());
    }
};

/// Uniform random walks, gamma per node, in canonical order (node-major,
/// then walk index). Each walk's randomness derives from (seed, node, walk
/// index) alone, so the output is byte-identical for any worker count.
/// A walk stops early at a neighborless node. workers = 0 picks a default.
WalkCorpus generate_walks(const Graph& graph, const WalkConfig& config, unsigned workers = 0);

struct TransactionRecord {
    std::string account;
    std::string item;
    int64_t timestamp = 0;  // seconds
};

struct TransactionLog {
    std::vector<TransactionRecord> records;
};

/// CSV with header `account,item,timestamp`. Records need not be sorted.
TransactionLog load_transactions(std::istream& in);
TransactionLog load_transactions_file(const std::string& path);

struct PairCorpusResult {
    WalkCorpus corpus;  // length-2 walks, both directions per qualifying pair
    Graph graph;        // co-occurrence graph: edge = at least one emitted pair
    uint64_t pairs_emitted = 0;  // unordered transaction pairs that qualified
};

/// For each account, every pair of its transactions with |dt| <= window and
/// distinct items emits the walks [a,b] and [b,a]. dedup_pairs collapses
/// repeated unordered item pairs per account to a single emission.
PairCorpusResult generate_cooccurrence_pairs(const TransactionLog& log, int64_t window_seconds,
                                             bool dedup_pairs = false);

/// One walk per line, space-separated external node ids.
void write_corpus(const WalkCorpus& corpus, const IdMap& ids, std::ostream& out);

struct CorpusLoad {
    WalkCorpus corpus;
    IdMap ids;  // first-seen order over corpus tokens
};
CorpusLoad read_corpus(std::istream& in);
CorpusLoad read_corpus_file(const std::string& path);

}  // namespace embeval
