#pragma once

#include <complex>
#include <cstdint>
#include <string_view>

namespace ncerg {

// Deterministic splittable generator.  The engine is a splitmix64 chain;
// all distributions are implemented in-house so that streams are
// bit-reproducible across platforms and standard library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    // uniform in [0, 1)
    double uniform();
    double uniform(double lo, double hi);

    // standard normal via Box-Muller (caches the spare value)
    double normal();

    // complex Gaussian with E|z|^2 = 1
    std::complex<double> cnormal();

    // inclusive range
    int uniform_int(int lo, int hi);
    long uniform_long(long lo, long hi);

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Per-trial seed derivation from (master seed, label, index).  Changing the
// index perturbs only that trial's stream.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t index);

} // namespace ncerg
