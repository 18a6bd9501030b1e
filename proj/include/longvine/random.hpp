#pragma once

#include "longvine/stats.hpp"

#include <cstdint>
#include <random>

namespace longvine {

//! Deterministic random stream. Wraps mt19937_64 but generates variates
//! through fixed arithmetic (no std::*_distribution), so sequences are
//! identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed)
      : gen_(seed)
    {}

    //! uniform on the open interval (0, 1)
    double uniform()
    {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    //! standard normal via inverse cdf
    double normal() { return stats::qnorm(uniform()); }

    //! uniform integer in {0, ..., n-1}
    std::uint64_t integer(std::uint64_t n)
    {
        std::uint64_t mask = ~std::uint64_t(0);
        std::uint64_t limit = n - 1;
        int shift = 0;
        while ((limit >> shift) != 0)
            ++shift;
        mask = (shift >= 64) ? mask : ((std::uint64_t(1) << shift) - 1);
        std::uint64_t r;
        do {
            r = gen_() & mask;
        } while (r >= n);
        return r;
    }

    //! Gamma(m/2, 1) for integer m >= 1: sum of exponentials plus half a
    //! squared normal for the fractional part
    double gamma_half_integer(int m)
    {
        double g = 0.0;
        for (int i = 0; i < m / 2; ++i)
            g += -std::log(uniform());
        if (m % 2 == 1) {
            double z = normal();
            g += 0.5 * z * z;
        }
        return g;
    }

    //! symmetric Beta(m/2, m/2) for integer m >= 1
    double beta_symmetric_half_integer(int m)
    {
        if (m == 2)
            return uniform(); // Beta(1,1)
        double g1 = gamma_half_integer(m);
        double g2 = gamma_half_integer(m);
        return g1 / (g1 + g2);
    }

    //! seed of an independent sub-stream, derived by index
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
    {
        return splitmix64(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
    }

    //! independent sub-stream derived from this stream's seed by index
    static Rng substream(std::uint64_t seed, std::uint64_t index)
    {
        return Rng(derive_seed(seed, index));
    }

private:
    static std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 gen_;
};

} // namespace longvine
