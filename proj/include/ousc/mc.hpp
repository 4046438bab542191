#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "ousc/params.hpp"

namespace ousc {

// Independent stream per (seed, path): results do not depend on how paths
// are scheduled across threads.
inline std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    return std::mt19937_64(seq);
}

// Exact transition of dX = theta (m - X) dt + eta dW over a step dt.
struct OuStep {
    double decay = 1, sd = 0;
    OuStep() = default;
    OuStep(const ModelParams& p, double dt)
        : decay(std::exp(-p.theta * dt)),
          sd(p.eta * std::sqrt(-std::expm1(-2.0 * p.theta * dt) / (2.0 * p.theta))) {}
    double operator()(double x, double level, double z) const {
        return x * decay + level * (1.0 - decay) + sd * z;
    }
};

inline double default_step(const ModelParams& p) { return 0.01 / std::max(p.theta, p.rho); }

}  // namespace ousc
