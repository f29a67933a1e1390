#pragma once

#include <cstdint>

#include "crfgat/training.hpp"

namespace crfgat {

struct ChainTopology {
    int length = 1;
};
struct GridTopology {
    int width = 1;
    int height = 1;
};

/// Seeded generator spec for synthetic labeling tasks: Voronoi-blob ground
/// truth over the topology, observations = one-hot(label) + Gaussian noise.
struct SyntheticSpec {
    std::variant<ChainTopology, GridTopology> topology = GridTopology{};
    int num_labels = 2;
    double noise_sigma = 0.5;
    int blob_count = 2;
    std::uint64_t seed = 0;
    int item_count = 1;

    int node_count() const;
    void validate() const;
};

LabeledDataset gen_synthetic(const SyntheticSpec& spec);

/// Fraction of positions where pred == gold.
double accuracy(const Labeling& pred, const Labeling& gold);

}  // namespace crfgat
