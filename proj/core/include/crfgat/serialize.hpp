#pragma once

#include <filesystem>
#include <nlohmann/json_fwd.hpp>

#include "crfgat/exact.hpp"
#include "crfgat/synthetic.hpp"

namespace crfgat {

inline constexpr int kSchemaVersion = 1;

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct VersionError : std::runtime_error {
    explicit VersionError(const std::string& what) : std::runtime_error(what) {}
};

/// Either flavor of model file, discriminated by "model_type".
using LoadedModel = std::variant<CrfModel, CrfGatModel>;

nlohmann::json to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CrfModel& model);
nlohmann::json to_json(const CrfGatModel& model);
nlohmann::json to_json(const LabeledDataset& data);
nlohmann::json to_json(const ExactResult& result);

CrfModel crf_model_from_json(const nlohmann::json& j);
CrfGatModel crf_gat_model_from_json(const nlohmann::json& j);
LabeledDataset dataset_from_json(const nlohmann::json& j);
ExactResult exact_result_from_json(const nlohmann::json& j);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

void save_model(const LoadedModel& model, const std::filesystem::path& path);
LoadedModel load_model(const std::filesystem::path& path);
void save_dataset(const LabeledDataset& data, const std::filesystem::path& path);
LabeledDataset load_dataset(const std::filesystem::path& path);

/// Per-item inference output: decoded labels, plus marginals when the
/// algorithm produces them.
struct InferenceOutput {
    std::string algo;
    std::vector<Labeling> labels;
    std::vector<MarginalField> marginals;  // empty, or one per item
};
void save_inference(const InferenceOutput& out, const std::filesystem::path& path);
InferenceOutput load_inference(const std::filesystem::path& path);

/// Labelings for `eval`: accepts an inference output file or a dataset file
/// (using its gold labels).
std::vector<Labeling> load_labelings(const std::filesystem::path& path);

/// CSV "step,value" trace.
void save_trace_csv(const std::vector<double>& values, const std::filesystem::path& path);

/// Grid of 1-based labels, one CSV row per grid row.
void save_labels_csv(const Labeling& labeling, int width, const std::filesystem::path& path);

}  // namespace crfgat
