#pragma once

// Reproducible RNG substreams for parallel Monte Carlo ensembles.
// Each trajectory gets its own generator seeded from (seed, stream id),
// so ensemble statistics are independent of the thread count.
//
// All variates derive from uniform() with fixed draw counts (Box-Muller
// without the cached partner), keeping coupled simulations in lockstep.

#include <cmath>
#include <cstdint>
#include <random>

namespace qtraj {

class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{
            static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
            static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        gen_.seed(seq);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Standard normal; consumes exactly two uniforms.
    double gaussian() {
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // Exponential with the given rate; consumes exactly one uniform.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  private:
    std::mt19937_64 gen_;
};

}  // namespace qtraj
