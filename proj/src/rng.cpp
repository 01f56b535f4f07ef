#include "xspa/rng.hpp"

#include <cmath>

namespace xspa {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

double Rng::gauss() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 in (0,1] to keep the log finite
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

double keyed_gauss(std::uint64_t seed, std::string_view tag, std::uint64_t i, std::uint64_t j) {
    std::uint64_t h = hash_combine(seed, fnv1a64(tag));
    h = hash_combine(h, i);
    h = hash_combine(h, j);
    // two uniforms from one mixed counter stream
    double u1 = 1.0 - static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;
    double u2 = static_cast<double>(mix64(h + 0x9e3779b97f4a7c15ULL) >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view item_id) {
    return hash_combine(master, fnv1a64(item_id));
}

}  // namespace xspa
