#pragma once

#include <cstdint>

#include "crfgat/model.hpp"

namespace crfgat {

enum class SamplerVariant { Gibbs, Metropolis };

/// MCMC configuration. The generator is std::mt19937_64, whose output stream
/// is fixed by the C++ standard, so a seed pins results across platforms.
struct SamplerConfig {
    int sweeps = 1000;
    int burn_in = 100;
    std::uint64_t seed = 0;
    SamplerVariant variant = SamplerVariant::Gibbs;

    void validate() const {
        if (sweeps <= 0) throw ShapeError("SamplerConfig: sweeps must be positive");
        if (burn_in < 0) throw ShapeError("SamplerConfig: burn_in must be non-negative");
        if (sweeps <= burn_in) throw ShapeError("SamplerConfig: sweeps must exceed burn_in");
    }
};

/// Systematic-scan Gibbs (or Metropolis) sampling; returns the marginal
/// estimate from label counts accumulated after burn-in.
MarginalField gibbs_sample(const CrfModel& model, const SamplerConfig& cfg);

}  // namespace crfgat
