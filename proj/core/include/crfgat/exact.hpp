#pragma once

#include <cstdint>

#include "crfgat/model.hpp"

namespace crfgat {

/// Exact quantities from full enumeration of the K^N labelings.
struct ExactResult {
    double log_Z = 0.0;
    MarginalField marginals;
    Labeling map_labeling;
    double map_energy = 0.0;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

/// Number of labelings K^N, saturating at the cap sentinel.
std::uint64_t configuration_count(const CrfModel& model);

/// Enumerates every labeling: log-partition via two-pass stable summation,
/// exact marginals, and the MAP labeling (ties broken lexicographically).
ExactResult enumerate_exact(const CrfModel& model,
                            std::uint64_t cap = kDefaultEnumerationCap);

/// KL divergence D(Q || P) of the factorized field q against the exact model
/// distribution, by enumeration. Terms with Q(Y) = 0 contribute nothing.
double exact_kl(const MarginalField& q, const CrfModel& model,
                std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace crfgat
