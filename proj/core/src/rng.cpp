#include "ncerg/rng.hpp"

#include <cmath>

namespace ncerg {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

} // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
    // 53 random mantissa bits
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

std::complex<double> Rng::cnormal() {
    double re = normal();
    double im = normal();
    return {re * 0.7071067811865475244, im * 0.7071067811865475244};
}

int Rng::uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

long Rng::uniform_long(long lo, long hi) {
    return lo + static_cast<long>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t index) {
    std::uint64_t x = master ^ fnv1a64(label);
    (void)splitmix64(x);
    x ^= 0x9E3779B97F4A7C15ull * (index + 1);
    std::uint64_t y = splitmix64(x);
    return y ^ splitmix64(x);
}

} // namespace ncerg
