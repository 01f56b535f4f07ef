#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace xspa {

/// FNV-1a 64-bit over a byte string. Stable across platforms; used for
/// config hashes and per-image seed derivation.
std::uint64_t fnv1a64(std::string_view bytes);

/// splitmix64 finalizer; good bit mixing for counter-based streams.
std::uint64_t mix64(std::uint64_t x);

/// Combine a value into a running hash (order-sensitive).
inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

/// Deterministic RNG with hand-rolled distributions so that streams are
/// bit-identical across compilers and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) {
        // multiply-shift; bias is negligible for the small n used here
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    /// Standard normal via Box-Muller.
    double gauss();

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Counter-based standard normal: deterministic function of the key parts.
/// Used for the toy encoder's fixed random linear maps, so weights never
/// need to be stored.
double keyed_gauss(std::uint64_t seed, std::string_view tag, std::uint64_t i, std::uint64_t j);

/// Stable per-item seed derivation, e.g. (master_seed, image_id) -> seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view item_id);

}  // namespace xspa
