#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace embeval {

inline constexpr const char* kVersion = "0.1.0";

/// Input that could not be parsed. `line` is 1-based, 0 when unknown.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, uint64_t line_no = 0)
        : std::runtime_error(line_no ? "line " + std::to_string(line_no) + ": " + msg : msg),
          line(line_no) {}
    uint64_t line;
};

/// Well-formed input that violates a data contract (unknown ids, counts out of range, ...).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A pipeline stage aborted; carries the stage name for reporting.
struct StageError : std::runtime_error {
    StageError(std::string stage_name, const std::string& msg)
        : std::runtime_error("stage '" + stage_name + "': " + msg), stage(std::move(stage_name)) {}
    std::string stage;
};

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Advances the state and returns the next value of the splitmix64 stream.
inline uint64_t splitmix64_next(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Fisher-Yates with our own stream so shuffles do not depend on the stdlib
/// version the binary happened to be built against.
template <class T>
void seeded_shuffle(std::vector<T>& v, uint64_t seed) {
    uint64_t state = seed;
    for (size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[splitmix64_next(state) % i]);
}

/// Deterministic seed mixing: order-sensitive chain of splitmix64 rounds.
inline uint64_t mix_seed(uint64_t seed, uint64_t a) { return splitmix64(splitmix64(seed) ^ a); }
inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
    return splitmix64(mix_seed(seed, a) ^ b);
}

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 1469598103934665603ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

/// Per-stage seeds derive from the one global seed by label, so a manifest
/// recording (global seed, stage label) pins every random stream in a run.
inline uint64_t stage_seed(uint64_t global_seed, std::string_view label) {
    return mix_seed(global_seed, fnv1a64(label));
}

}  // namespace embeval
