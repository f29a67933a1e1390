#include "crfgat/synthetic.hpp"

#include <random>

namespace crfgat {

int SyntheticSpec::node_count() const {
    if (const auto* chain = std::get_if<ChainTopology>(&topology)) return chain->length;
    const auto& grid = std::get<GridTopology>(topology);
    return grid.width * grid.height;
}

void SyntheticSpec::validate() const {
    if (node_count() < 1) throw ShapeError("SyntheticSpec: topology has no nodes");
    if (num_labels < 2) throw ShapeError("SyntheticSpec: K must be >= 2");
    if (!(noise_sigma > 0.0)) throw ShapeError("SyntheticSpec: noise_sigma must be positive");
    if (blob_count < 1) throw ShapeError("SyntheticSpec: blob_count must be positive");
    if (blob_count > node_count())
        throw ShapeError("SyntheticSpec: blob_count " + std::to_string(blob_count) +
                         " exceeds node count " + std::to_string(node_count()));
    if (item_count < 1) throw ShapeError("SyntheticSpec: item_count must be positive");
}

LabeledDataset gen_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const int n = spec.node_count();
    const int k = spec.num_labels;

    // Node coordinates: chain index, or (row, col) on the grid.
    Matrix coords;
    if (std::holds_alternative<ChainTopology>(spec.topology)) {
        coords.resize(n, 1);
        for (int i = 0; i < n; ++i) coords(i, 0) = i;
    } else {
        const auto& grid = std::get<GridTopology>(spec.topology);
        coords.resize(n, 2);
        for (int r = 0; r < grid.height; ++r)
            for (int c = 0; c < grid.width; ++c) {
                coords(r * grid.width + c, 0) = r;
                coords(r * grid.width + c, 1) = c;
            }
    }

    std::uniform_int_distribution<int> node_dist(0, n - 1);
    std::uniform_int_distribution<int> label_dist(0, k - 1);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);

    LabeledDataset data;
    data.label_space.num_labels = k;
    for (int item = 0; item < spec.item_count; ++item) {
        // Blob seeds: random nodes with random labels; ground truth is the
        // nearest seed's label (ties to the earlier seed).
        std::vector<int> seed_nodes(spec.blob_count);
        std::vector<int> seed_labels(spec.blob_count);
        for (int b = 0; b < spec.blob_count; ++b) {
            seed_nodes[b] = node_dist(rng);
            seed_labels[b] = label_dist(rng);
        }

        LabeledExample ex;
        ex.gold.y.resize(n);
        ex.sequence.positions = coords;
        ex.sequence.observations.resize(n, k);
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (coords.row(i) - coords.row(seed_nodes[0])).squaredNorm();
            for (int b = 1; b < spec.blob_count; ++b) {
                double d = (coords.row(i) - coords.row(seed_nodes[b])).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = b;
                }
            }
            ex.gold.y[i] = seed_labels[best];
            for (int l = 0; l < k; ++l)
                ex.sequence.observations(i, l) = (l == ex.gold.y[i] ? 1.0 : 0.0) + noise(rng);
        }
        data.items.push_back(std::move(ex));
    }
    return data;
}

double accuracy(const Labeling& pred, const Labeling& gold) {
    if (pred.size() != gold.size()) throw ShapeError("accuracy: labeling length mismatch");
    int hits = 0;
    for (int i = 0; i < pred.size(); ++i) hits += (pred.y[i] == gold.y[i]);
    return static_cast<double>(hits) / pred.size();
}

}  // namespace crfgat
