#include "crfgat/serialize.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

namespace crfgat {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ParseError(std::string(what) + ": expected a 2-D array");
    Matrix m(j.size(), j[0].size());
    for (size_t i = 0; i < j.size(); ++i) {
        if (j[i].size() != static_cast<size_t>(m.cols()))
            throw ParseError(std::string(what) + ": ragged rows");
        for (size_t c = 0; c < j[i].size(); ++c) m(i, c) = j[i][c].get<double>();
    }
    return m;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Vector vector_from_json(const json& j) {
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

// Labels are 1-based in files.
json labeling_to_json(const Labeling& y) {
    json out = json::array();
    for (int l : y.y) out.push_back(l + 1);
    return out;
}

Labeling labeling_from_json(const json& j) {
    Labeling y;
    for (const auto& v : j) y.y.push_back(v.get<int>() - 1);
    return y;
}

void check_version(const json& j, const char* what) {
    if (!j.contains("schema_version"))
        throw ParseError(std::string(what) + ": missing schema_version");
    int v = j.at("schema_version").get<int>();
    if (v != kSchemaVersion)
        throw VersionError(std::string(what) + ": schema_version " + std::to_string(v) +
                           " not supported (expected " + std::to_string(kSchemaVersion) + ")");
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
}

}  // namespace

json to_json(const KernelSpec& spec) {
    json j;
    if (const auto* g = std::get_if<GaussianBilateralKernel>(&spec)) {
        j["variant"] = "gaussian_bilateral";
        j["components"] = json::array();
        for (const auto& c : g->components)
            j["components"].push_back({{"omega", c.omega},
                                       {"sigma_spatial", c.sigma_spatial},
                                       {"sigma_appearance", c.sigma_appearance}});
    } else if (const auto* p = std::get_if<PolynomialKernel>(&spec)) {
        j["variant"] = "polynomial";
        j["scale"] = p->scale;
        j["bias"] = p->bias;
        j["degree"] = p->degree;
    } else {
        j["variant"] = "precomputed";
        j["matrix"] = matrix_to_json(std::get<PrecomputedKernel>(spec).matrix);
    }
    return j;
}

KernelSpec kernel_from_json(const json& j) {
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "gaussian_bilateral") {
        GaussianBilateralKernel g;
        for (const auto& c : j.at("components"))
            g.components.push_back({c.at("omega").get<double>(),
                                    c.at("sigma_spatial").get<double>(),
                                    c.at("sigma_appearance").get<double>()});
        return g;
    }
    if (variant == "polynomial") {
        return PolynomialKernel{j.at("scale").get<double>(), j.at("bias").get<double>(),
                                j.at("degree").get<int>()};
    }
    if (variant == "precomputed") {
        return PrecomputedKernel{matrix_from_json(j.at("matrix"), "precomputed kernel")};
    }
    throw ParseError("unknown kernel variant: " + variant);
}

json to_json(const CrfModel& model) {
    return json{{"schema_version", kSchemaVersion},
                {"model_type", "crf"},
                {"num_labels", model.label_space.num_labels},
                {"positions", matrix_to_json(model.sequence.positions)},
                {"observations", matrix_to_json(model.sequence.observations)},
                {"unary", matrix_to_json(model.unary.psi)},
                {"compatibility",
                 {{"mu", matrix_to_json(model.compatibility.mu)},
                  {"symmetric", model.compatibility.symmetric}}},
                {"kernel", to_json(model.kernel)}};
}

CrfModel crf_model_from_json(const json& j) {
    check_version(j, "crf model");
    CrfModel m;
    m.label_space.num_labels = j.at("num_labels").get<int>();
    m.sequence.positions = matrix_from_json(j.at("positions"), "positions");
    m.sequence.observations = matrix_from_json(j.at("observations"), "observations");
    m.unary.psi = matrix_from_json(j.at("unary"), "unary");
    m.compatibility.mu = matrix_from_json(j.at("compatibility").at("mu"), "compatibility");
    m.compatibility.symmetric = j.at("compatibility").at("symmetric").get<bool>();
    m.kernel = kernel_from_json(j.at("kernel"));
    return m;
}

json to_json(const CrfGatModel& model) {
    json layers = json::array();
    for (const auto& layer : model.layers)
        layers.push_back({{"mu", matrix_to_json(layer.mu.mu)},
                          {"symmetric", layer.mu.symmetric},
                          {"kernel", to_json(layer.kernel)}});
    return json{{"schema_version", kSchemaVersion},
                {"model_type", "crf_gat"},
                {"num_labels", model.label_space.num_labels},
                {"share_parameters", model.share_parameters},
                {"layers", std::move(layers)},
                {"unary",
                 {{"weight", matrix_to_json(model.unary_params.weight)},
                  {"bias", vector_to_json(model.unary_params.bias)}}}};
}

CrfGatModel crf_gat_model_from_json(const json& j) {
    check_version(j, "crf_gat model");
    CrfGatModel m;
    m.label_space.num_labels = j.at("num_labels").get<int>();
    m.share_parameters = j.at("share_parameters").get<bool>();
    for (const auto& layer : j.at("layers")) {
        GatLayerParams p;
        p.mu.mu = matrix_from_json(layer.at("mu"), "layer mu");
        p.mu.symmetric = layer.at("symmetric").get<bool>();
        p.kernel = kernel_from_json(layer.at("kernel"));
        m.layers.push_back(std::move(p));
    }
    m.unary_params.weight = matrix_from_json(j.at("unary").at("weight"), "unary weight");
    m.unary_params.bias = vector_from_json(j.at("unary").at("bias"));
    return m;
}

json to_json(const LabeledDataset& data) {
    json items = json::array();
    for (const auto& item : data.items)
        items.push_back({{"positions", matrix_to_json(item.sequence.positions)},
                         {"observations", matrix_to_json(item.sequence.observations)},
                         {"gold", labeling_to_json(item.gold)}});
    return json{{"schema_version", kSchemaVersion},
                {"num_labels", data.label_space.num_labels},
                {"items", std::move(items)}};
}

LabeledDataset dataset_from_json(const json& j) {
    check_version(j, "dataset");
    LabeledDataset data;
    data.label_space.num_labels = j.at("num_labels").get<int>();
    for (const auto& item : j.at("items")) {
        LabeledExample ex;
        ex.sequence.positions = matrix_from_json(item.at("positions"), "positions");
        ex.sequence.observations = matrix_from_json(item.at("observations"), "observations");
        ex.gold = labeling_from_json(item.at("gold"));
        data.items.push_back(std::move(ex));
    }
    return data;
}

json to_json(const ExactResult& result) {
    return json{{"schema_version", kSchemaVersion},
                {"log_Z", result.log_Z},
                {"marginals", matrix_to_json(result.marginals.q)},
                {"map_labeling", labeling_to_json(result.map_labeling)},
                {"map_energy", result.map_energy}};
}

ExactResult exact_result_from_json(const json& j) {
    check_version(j, "exact result");
    ExactResult r;
    r.log_Z = j.at("log_Z").get<double>();
    r.marginals.q = matrix_from_json(j.at("marginals"), "marginals");
    r.map_labeling = labeling_from_json(j.at("map_labeling"));
    r.map_energy = j.at("map_energy").get<double>();
    return r;
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
    SyntheticSpec spec;
    const std::string topo = j.at("topology").get<std::string>();
    if (topo == "chain") {
        spec.topology = ChainTopology{j.at("length").get<int>()};
    } else if (topo == "grid") {
        spec.topology = GridTopology{j.at("width").get<int>(), j.at("height").get<int>()};
    } else {
        throw ParseError("unknown topology: " + topo);
    }
    spec.num_labels = j.at("num_labels").get<int>();
    spec.noise_sigma = j.at("noise_sigma").get<double>();
    spec.blob_count = j.at("blob_count").get<int>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.item_count = j.value("item_count", 1);
    return spec;
}

void save_model(const LoadedModel& model, const std::filesystem::path& path) {
    std::visit([&](const auto& m) { write_json_file(to_json(m), path); }, model);
}

LoadedModel load_model(const std::filesystem::path& path) {
    json j = read_json_file(path);
    const std::string type = j.value("model_type", "");
    if (type == "crf") return crf_model_from_json(j);
    if (type == "crf_gat") return crf_gat_model_from_json(j);
    throw ParseError(path.string() + ": unknown model_type \"" + type + "\"");
}

void save_dataset(const LabeledDataset& data, const std::filesystem::path& path) {
    write_json_file(to_json(data), path);
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
    return dataset_from_json(read_json_file(path));
}

void save_inference(const InferenceOutput& out, const std::filesystem::path& path) {
    json items = json::array();
    for (size_t i = 0; i < out.labels.size(); ++i) {
        json item{{"labels", labeling_to_json(out.labels[i])}};
        if (i < out.marginals.size()) item["marginals"] = matrix_to_json(out.marginals[i].q);
        items.push_back(std::move(item));
    }
    write_json_file(json{{"schema_version", kSchemaVersion},
                         {"algo", out.algo},
                         {"items", std::move(items)}},
                    path);
}

InferenceOutput load_inference(const std::filesystem::path& path) {
    json j = read_json_file(path);
    check_version(j, "inference output");
    InferenceOutput out;
    out.algo = j.value("algo", "");
    for (const auto& item : j.at("items")) {
        out.labels.push_back(labeling_from_json(item.at("labels")));
        if (item.contains("marginals"))
            out.marginals.push_back(MarginalField{matrix_from_json(item["marginals"], "marginals")});
    }
    return out;
}

std::vector<Labeling> load_labelings(const std::filesystem::path& path) {
    json j = read_json_file(path);
    check_version(j, "labelings");
    std::vector<Labeling> out;
    for (const auto& item : j.at("items")) {
        if (item.contains("labels"))
            out.push_back(labeling_from_json(item["labels"]));
        else if (item.contains("gold"))
            out.push_back(labeling_from_json(item["gold"]));
        else
            throw ParseError(path.string() + ": item has neither labels nor gold");
    }
    return out;
}

void save_trace_csv(const std::vector<double>& values, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    out << "step,value\n";
    out.precision(17);
    for (size_t i = 0; i < values.size(); ++i) out << i << "," << values[i] << "\n";
}

void save_labels_csv(const Labeling& labeling, int width, const std::filesystem::path& path) {
    if (width < 1 || labeling.size() % width != 0)
        throw ShapeError("save_labels_csv: labeling length is not a multiple of width");
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    for (int i = 0; i < labeling.size(); ++i) {
        out << (labeling.y[i] + 1);
        out << (((i + 1) % width == 0) ? '\n' : ',');
    }
}

}  // namespace crfgat
