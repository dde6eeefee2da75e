#include "embeval/walks.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>
#include <utility>

#include "embeval/common.hpp"

namespace embeval {

namespace {

// Fill out[0..length) with a uniform walk from start; returns tokens written.
// The walk ends early if it reaches a neighborless node.
uint32_t run_walk(const Graph& graph, uint32_t start, uint32_t length, uint64_t walk_seed,
                  uint32_t* out) {
    std::mt19937_64 rng(walk_seed);
    uint32_t cur = start;
    uint32_t n = 0;
    out[n++] = cur;
    while (n < length) {
        auto nbrs = graph.neighbors(cur);
        if (nbrs.empty()) break;
        cur = nbrs[rng() % nbrs.size()];
        out[n++] = cur;
    }
    return n;
}

}  // namespace

WalkCorpus generate_walks(const Graph& graph, const WalkConfig& config, unsigned workers) {
    if (config.walk_length < 2) throw DataError("walk_length must be >= 2");
    if (config.walks_per_node == 0) throw DataError("walks_per_node must be >= 1");
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }

    const uint64_t n = graph.num_nodes();
    const uint64_t gamma = config.walks_per_node;
    const uint64_t total_walks = n * gamma;
    workers = static_cast<unsigned>(std::min<uint64_t>(workers, std::max<uint64_t>(total_walks, 1)));

    // Walk w in canonical order is (node w / gamma, repeat w % gamma). Each
    // worker fills a contiguous slice into a preallocated buffer; lengths are
    // compacted afterwards so the result never depends on the split.
    std::vector<uint32_t> buf(total_walks * config.walk_length);
    std::vector<uint32_t> lens(total_walks);

    auto work = [&](uint64_t begin, uint64_t end) {
        for (uint64_t w = begin; w < end; ++w) {
            uint32_t node = static_cast<uint32_t>(w / gamma);
            uint64_t rep = w % gamma;
            uint64_t walk_seed = mix_seed(config.seed, node, rep);
            lens[w] = run_walk(graph, node, config.walk_length, walk_seed,
                               buf.data() + w * config.walk_length);
        }
    };

    if (workers <= 1 || total_walks == 0) {
        work(0, total_walks);
    } else {
        std::vector<std::thread> pool;
        uint64_t chunk = (total_walks + workers - 1) / workers;
        for (unsigned t = 0; t < workers; ++t) {
            uint64_t b = t * chunk;
            uint64_t e = std::min(total_walks, b + chunk);
            if (b >= e) break;
            pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }

    WalkCorpus corpus;
    corpus.offsets.reserve(total_walks + 1);
    uint64_t total = 0;
    for (uint64_t w = 0; w < total_walks; ++w) total += lens[w];
    corpus.tokens.reserve(total);
    for (uint64_t w = 0; w < total_walks; ++w) {
        const uint32_t* src = buf.data() + w * config.walk_length;
        corpus.tokens.insert(corpus.tokens.end(), src, src + lens[w]);
        corpus.offsets.push_back(corpus.tokens.size());
    }
    return corpus;
}

namespace {

// Split a CSV line into exactly three fields. No quoting support: the inputs
// here are plain identifiers and integer timestamps.
bool split3(const std::string& line, std::string& a, std::string& b, std::string& c) {
    size_t p1 = line.find(',');
    if (p1 == std::string::npos) return false;
    size_t p2 = line.find(',', p1 + 1);
    if (p2 == std::string::npos) return false;
    if (line.find(',', p2 + 1) != std::string::npos) return false;
    a = line.substr(0, p1);
    b = line.substr(p1 + 1, p2 - p1 - 1);
    c = line.substr(p2 + 1);
    return true;
}

void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
}

}  // namespace

TransactionLog load_transactions(std::istream& in) {
    TransactionLog log;
    std::string line;
    uint64_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        std::string account, item, ts;
        if (!split3(line, account, item, ts))
            throw ParseError("expected `account,item,timestamp`", line_no);
        if (!saw_header) {
            saw_header = true;
            if (account == "account" && item == "item" && ts == "timestamp") continue;
            throw ParseError("missing `account,item,timestamp` header", line_no);
        }
        if (account.empty() || item.empty())
            throw ParseError("empty account or item field", line_no);
        int64_t t = 0;
        auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), t);
        if (ec != std::errc() || ptr != ts.data() + ts.size())
            throw ParseError("timestamp is not an integer: `" + ts + "`", line_no);
        log.records.push_back({std::move(account), std::move(item), t});
    }
    return log;
}

TransactionLog load_transactions_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open transactions file: " + path);
    return load_transactions(in);
}

PairCorpusResult generate_cooccurrence_pairs(const TransactionLog& log, int64_t window_seconds,
                                             bool dedup_pairs) {
    if (window_seconds < 0) throw DataError("window must be >= 0 seconds");

    PairCorpusResult res;
    IdMap ids;
    std::vector<uint32_t> item_of(log.records.size());
    for (uint32_t i = 0; i < log.records.size(); ++i) item_of[i] = ids.add(log.records[i].item);

    // Group record indices by account, keep input order within a group stable
    // by sorting on (timestamp, original index).
    std::map<std::string, std::vector<uint32_t>> by_account;
    for (uint32_t i = 0; i < log.records.size(); ++i)
        by_account[log.records[i].account].push_back(i);

    std::vector<std::pair<uint32_t, uint32_t>> edges;
    for (auto& [account, idxs] : by_account) {
        std::sort(idxs.begin(), idxs.end(), [&](uint32_t a, uint32_t b) {
            int64_t ta = log.records[a].timestamp, tb = log.records[b].timestamp;
            return ta != tb ? ta < tb : a < b;
        });
        std::vector<std::pair<uint32_t, uint32_t>> seen;  // unordered item pairs this account
        size_t lo = 0;
        for (size_t hi = 0; hi < idxs.size(); ++hi) {
            int64_t t_hi = log.records[idxs[hi]].timestamp;
            while (log.records[idxs[lo]].timestamp < t_hi - window_seconds) ++lo;
            uint32_t item_hi = item_of[idxs[hi]];
            for (size_t j = lo; j < hi; ++j) {
                uint32_t item_lo = item_of[idxs[j]];
                if (item_lo == item_hi) continue;  // same item, no pair
                auto key = std::minmax(item_lo, item_hi);
                if (dedup_pairs) {
                    if (std::find(seen.begin(), seen.end(),
                                  std::pair<uint32_t, uint32_t>(key.first, key.second)) !=
                        seen.end())
                        continue;
                    seen.emplace_back(key.first, key.second);
                }
                uint32_t pair_walk[2] = {item_lo, item_hi};
                res.corpus.add_walk(pair_walk);
                uint32_t rev[2] = {item_hi, item_lo};
                res.corpus.add_walk(rev);
                edges.emplace_back(key.first, key.second);
                ++res.pairs_emitted;
            }
        }
    }

    uint32_t num_items = ids.size();  // read before the move; argument order is unspecified
    res.graph = Graph::from_edges(num_items, edges, std::move(ids));
    return res;
}

void write_corpus(const WalkCorpus& corpus, const IdMap& ids, std::ostream& out) {
    for (uint64_t w = 0; w < corpus.num_walks(); ++w) {
        auto walk = corpus.walk(w);
        for (size_t i = 0; i < walk.size(); ++i) {
            if (i) out << ' ';
            out << ids.name(walk[i]);
        }
        out << '\n';
    }
}

CorpusLoad read_corpus(std::istream& in) {
    CorpusLoad load;
    std::string line;
    uint64_t line_no = 0;
    std::vector<uint32_t> walk;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        walk.clear();
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) walk.push_back(load.ids.add(tok));
        if (walk.empty()) throw ParseError("blank walk", line_no);
        load.corpus.add_walk(walk);
    }
    return load;
}

CorpusLoad read_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path);
    return read_corpus(in);
}

}  // namespace embeval
