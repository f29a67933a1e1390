#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "crfgat/serialize.hpp"
#include "test_util.hpp"

using namespace crfgat;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("crfgat_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("gen_synthetic") {
    SUBCASE("1x1 grid is the blob seed's label") {
        SyntheticSpec spec;
        spec.topology = GridTopology{1, 1};
        spec.num_labels = 2;
        spec.noise_sigma = 0.1;
        spec.blob_count = 1;
        LabeledDataset data = gen_synthetic(spec);
        REQUIRE(data.items.size() == 1);
        CHECK(data.items[0].gold.size() == 1);
        CHECK(data.items[0].sequence.observations(0, data.items[0].gold.y[0]) > 0.5);
    }
    SUBCASE("same seed reproduces the dataset exactly") {
        SyntheticSpec spec;
        spec.topology = GridTopology{5, 5};
        spec.num_labels = 3;
        spec.noise_sigma = 0.7;
        spec.blob_count = 3;
        spec.seed = 77;
        spec.item_count = 2;
        LabeledDataset a = gen_synthetic(spec);
        LabeledDataset b = gen_synthetic(spec);
        for (size_t i = 0; i < a.items.size(); ++i) {
            CHECK(a.items[i].gold == b.items[i].gold);
            CHECK(a.items[i].sequence.observations == b.items[i].sequence.observations);
        }
    }
    SUBCASE("blob_count above node count is rejected") {
        SyntheticSpec spec;
        spec.topology = ChainTopology{3};
        spec.blob_count = 4;
        CHECK_THROWS_AS(gen_synthetic(spec), ShapeError);
    }
    SUBCASE("labels are spatially coherent on a grid") {
        // Equal-label fraction among 4-neighbor pairs must beat the
        // label-frequency-matched random baseline.
        int coherent_wins = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            SyntheticSpec spec;
            spec.topology = GridTopology{16, 16};
            spec.num_labels = 4;
            spec.noise_sigma = 0.5;
            spec.blob_count = 4;
            spec.seed = seed;
            LabeledDataset data = gen_synthetic(spec);
            const auto& gold = data.items[0].gold.y;

            Eigen::Vector4d freq = Eigen::Vector4d::Zero();
            for (int l : gold) freq(l) += 1.0 / gold.size();
            double baseline = freq.squaredNorm();

            int equal = 0, pairs = 0;
            for (int r = 0; r < 16; ++r)
                for (int c = 0; c < 16; ++c) {
                    if (c + 1 < 16) {
                        equal += gold[r * 16 + c] == gold[r * 16 + c + 1];
                        ++pairs;
                    }
                    if (r + 1 < 16) {
                        equal += gold[r * 16 + c] == gold[(r + 1) * 16 + c];
                        ++pairs;
                    }
                }
            if (static_cast<double>(equal) / pairs > baseline) ++coherent_wins;
        }
        CHECK(coherent_wins >= 19);
    }
}

TEST_CASE("accuracy") {
    CHECK(accuracy(Labeling{{0, 1, 1}}, Labeling{{0, 1, 1}}) == 1.0);
    CHECK(accuracy(Labeling{{0, 0}}, Labeling{{1, 1}}) == 0.0);
    CHECK(accuracy(Labeling{{0, 1, 1, 0}}, Labeling{{0, 0, 1, 1}}) == 0.5);
    CHECK_THROWS_AS(accuracy(Labeling{{0}}, Labeling{{0, 1}}), ShapeError);
}

TEST_CASE("model round trips are lossless") {
    TempDir dir;
    std::mt19937_64 rng(21);

    SUBCASE("crf model") {
        CrfModel m = crfgat::testing::random_model(rng, 6, 3);
        save_model(LoadedModel{m}, dir.path / "crf.json");
        auto loaded = std::get<CrfModel>(load_model(dir.path / "crf.json"));
        CHECK(loaded.unary.psi == m.unary.psi);
        CHECK(loaded.compatibility.mu == m.compatibility.mu);
        CHECK(loaded.sequence.positions == m.sequence.positions);
        CHECK(loaded.sequence.observations == m.sequence.observations);
        const auto& ka = std::get<GaussianBilateralKernel>(m.kernel);
        const auto& kb = std::get<GaussianBilateralKernel>(loaded.kernel);
        REQUIRE(ka.components.size() == kb.components.size());
        for (size_t c = 0; c < ka.components.size(); ++c) {
            CHECK(ka.components[c].omega == kb.components[c].omega);
            CHECK(ka.components[c].sigma_spatial == kb.components[c].sigma_spatial);
            CHECK(ka.components[c].sigma_appearance == kb.components[c].sigma_appearance);
        }
    }
    SUBCASE("crf_gat model") {
        CrfGatModel m = crfgat::testing::random_gat_model(rng, 3, 2, 3);
        save_model(LoadedModel{m}, dir.path / "gat.json");
        auto loaded = std::get<CrfGatModel>(load_model(dir.path / "gat.json"));
        CHECK(loaded.layers.size() == m.layers.size());
        for (size_t l = 0; l < m.layers.size(); ++l)
            CHECK(loaded.layers[l].mu.mu == m.layers[l].mu.mu);
        CHECK(loaded.unary_params.weight == m.unary_params.weight);
        CHECK(loaded.unary_params.bias == m.unary_params.bias);
    }
    SUBCASE("dataset") {
        SyntheticSpec spec;
        spec.topology = GridTopology{4, 4};
        spec.num_labels = 3;
        spec.noise_sigma = 0.6;
        spec.blob_count = 2;
        spec.item_count = 3;
        LabeledDataset data = gen_synthetic(spec);
        save_dataset(data, dir.path / "data.json");
        LabeledDataset loaded = load_dataset(dir.path / "data.json");
        REQUIRE(loaded.items.size() == data.items.size());
        for (size_t i = 0; i < data.items.size(); ++i) {
            CHECK(loaded.items[i].gold == data.items[i].gold);
            CHECK(loaded.items[i].sequence.observations == data.items[i].sequence.observations);
        }
    }
    SUBCASE("exact result") {
        ExactResult r = enumerate_exact(crfgat::testing::tiny_instance());
        nlohmann::json j = to_json(r);
        ExactResult back = exact_result_from_json(j);
        CHECK(back.log_Z == r.log_Z);
        CHECK(back.marginals.q == r.marginals.q);
        CHECK(back.map_labeling == r.map_labeling);
    }
}

TEST_CASE("malformed files are rejected") {
    TempDir dir;
    SUBCASE("truncated JSON gives a parse error") {
        std::ofstream(dir.path / "bad.json") << "{\"schema_version\": 1, \"model_";
        CHECK_THROWS_AS(load_model(dir.path / "bad.json"), ParseError);
    }
    SUBCASE("future schema version gives a version error") {
        std::ofstream(dir.path / "future.json")
            << R"({"schema_version": 999, "model_type": "crf_gat"})";
        CHECK_THROWS_AS(load_model(dir.path / "future.json"), VersionError);
    }
    SUBCASE("missing file gives a parse error naming the path") {
        try {
            load_dataset(dir.path / "nope.json");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("nope.json") != std::string::npos);
        }
    }
}

TEST_CASE("trace and label CSV exports") {
    TempDir dir;
    save_trace_csv({0.5, 0.25}, dir.path / "trace.csv");
    std::ifstream trace(dir.path / "trace.csv");
    std::string line;
    std::getline(trace, line);
    CHECK(line == "step,value");
    std::getline(trace, line);
    CHECK(line == "0,0.5");

    save_labels_csv(Labeling{{0, 1, 1, 0}}, 2, dir.path / "labels.csv");
    std::ifstream labels(dir.path / "labels.csv");
    std::getline(labels, line);
    CHECK(line == "1,2");
    std::getline(labels, line);
    CHECK(line == "2,1");

    CHECK_THROWS_AS(save_labels_csv(Labeling{{0, 1, 0}}, 2, dir.path / "x.csv"), ShapeError);
}
