#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tlrm {

// All randomness in the library flows from one master seed through named
// sub-streams: derive_seed(master, "ppc.sim", k) and the like. Independent
// components never share a generator, so results do not depend on call
// interleaving.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return unif_(gen_); }           // [0,1)
    double normal() { return norm_(gen_); }            // N(0,1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    long poisson(double rate) {
        if (rate <= 0.0) return 0;
        return pois_(gen_, std::poisson_distribution<long>::param_type(rate));
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t uniform_index(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    std::uniform_real_distribution<double> unif_{0.0, 1.0};
    std::normal_distribution<double> norm_{0.0, 1.0};
    std::poisson_distribution<long> pois_;
};

inline Rng make_rng(std::uint64_t master, std::string_view stream, std::uint64_t index = 0) {
    return Rng(derive_seed(master, stream, index));
}

}  // namespace tlrm
