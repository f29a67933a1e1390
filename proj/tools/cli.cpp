#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "crfgat/meanfield.hpp"
#include "crfgat/sampler.hpp"
#include "crfgat/serialize.hpp"

namespace crfgat {

namespace {

using nlohmann::json;

struct InferOptions {
    std::string model_path, data_path, algo, out_path, trace_path;
    int max_iter = 100;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    int sweeps = 200000;
    int burn_in = 1000;
};

// Instantiates the pairwise CRF for one dataset item. A "crf" model supplies
// its own unary table and pairwise parameters; a "crf_gat" model runs its
// classifier and uses layer 1's parameters for the pairwise term.
CrfModel item_crf(const LoadedModel& loaded, const LabeledExample& item) {
    CrfModel m;
    if (const auto* crf = std::get_if<CrfModel>(&loaded)) {
        m = *crf;
        if (crf->num_nodes() != item.sequence.size())
            throw ShapeError("model N=" + std::to_string(crf->num_nodes()) +
                             " does not match dataset item N=" +
                             std::to_string(item.sequence.size()));
        m.sequence = item.sequence;
    } else {
        const auto& gat = std::get<CrfGatModel>(loaded);
        m.label_space = gat.label_space;
        m.sequence = item.sequence;
        m.unary = classifier_potentials(gat.unary_params, item.sequence);
        m.compatibility = gat.layers.front().mu;
        m.kernel = gat.layers.front().kernel;
    }
    return m;
}

InferenceOutput run_inference(const LoadedModel& loaded, const LabeledDataset& data,
                              const InferOptions& opt, std::vector<double>* trace) {
    InferenceOutput out;
    out.algo = opt.algo;
    for (const auto& item : data.items) {
        if (opt.algo == "gat") {
            const auto* gat = std::get_if<CrfGatModel>(&loaded);
            if (!gat) throw ShapeError("--algo gat requires a crf_gat model");
            UnaryPotentials unary = classifier_potentials(gat->unary_params, item.sequence);
            auto [psi, unused] = gat_forward(*gat, item.sequence, unary, /*keep_trace=*/false);
            out.labels.push_back(decode_argmin(psi));
            out.marginals.push_back(distribution_from_potentials(psi));
            continue;
        }
        CrfModel model = item_crf(loaded, item);
        if (opt.algo == "mf" || opt.algo == "mf-seq") {
            MeanFieldConfig cfg;
            cfg.max_iter = opt.max_iter;
            cfg.tol = opt.tol;
            cfg.schedule = (opt.algo == "mf") ? MfSchedule::Parallel : MfSchedule::Sequential;
            auto [q, diag] = run_mean_field(model, cfg);
            out.labels.push_back(decode_argmax(q));
            out.marginals.push_back(std::move(q));
            if (trace && trace->empty()) *trace = diag.linf_trace;
        } else if (opt.algo == "exact") {
            ExactResult r = enumerate_exact(model);
            out.labels.push_back(r.map_labeling);
            out.marginals.push_back(std::move(r.marginals));
        } else if (opt.algo == "gibbs") {
            SamplerConfig cfg;
            cfg.sweeps = opt.sweeps;
            cfg.burn_in = opt.burn_in;
            cfg.seed = opt.seed;
            MarginalField q = gibbs_sample(model, cfg);
            out.labels.push_back(decode_argmax(q));
            out.marginals.push_back(std::move(q));
        } else {
            throw ShapeError("unknown algorithm: " + opt.algo);
        }
    }
    return out;
}

int cmd_gen(const std::string& spec_path, const std::string& out_path,
            const std::string& labels_csv) {
    std::ifstream in(spec_path);
    if (!in) throw ParseError("cannot open " + spec_path);
    SyntheticSpec spec = synthetic_spec_from_json(json::parse(in));
    LabeledDataset data = gen_synthetic(spec);
    save_dataset(data, out_path);
    if (!labels_csv.empty()) {
        int width = std::holds_alternative<GridTopology>(spec.topology)
                        ? std::get<GridTopology>(spec.topology).width
                        : spec.node_count();
        save_labels_csv(data.items.front().gold, width, labels_csv);
    }
    return 0;
}

int cmd_train(const std::string& model_path, const std::string& data_path,
              const std::string& config_path, const std::string& out_path,
              const std::string& trace_path) {
    LoadedModel loaded = load_model(model_path);
    const auto* gat = std::get_if<CrfGatModel>(&loaded);
    if (!gat) throw ShapeError("train requires a crf_gat model");
    LabeledDataset data = load_dataset(data_path);

    std::ifstream in(config_path);
    if (!in) throw ParseError("cannot open " + config_path);
    json j = json::parse(in);
    TrainConfig cfg;
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.train_sigma = j.value("train_sigma", cfg.train_sigma);
    cfg.symmetrize_mu = j.value("symmetrize_mu", cfg.symmetrize_mu);
    cfg.fd_epsilon = j.value("fd_epsilon", cfg.fd_epsilon);

    TrainResult result = train(*gat, data, cfg);
    save_model(LoadedModel{std::move(result.model)}, out_path);
    if (!trace_path.empty()) save_trace_csv(result.loss_trace, trace_path);
    return 0;
}

int cmd_compare(const std::string& model_path, const std::string& data_path,
                const std::string& algos_csv, const std::string& report_path,
                const InferOptions& base_opt) {
    LoadedModel loaded = load_model(model_path);
    LabeledDataset data = load_dataset(data_path);

    std::vector<std::string> algos;
    for (size_t start = 0; start <= algos_csv.size();) {
        size_t comma = algos_csv.find(',', start);
        if (comma == std::string::npos) comma = algos_csv.size();
        if (comma > start) algos.push_back(algos_csv.substr(start, comma - start));
        start = comma + 1;
    }
    if (algos.empty()) throw ShapeError("--algos list is empty");

    std::ofstream report(report_path);
    if (!report) throw ParseError("cannot open " + report_path + " for writing");
    report << "algo,item,accuracy,energy,linf_vs_exact,wall_ms\n";
    report.precision(17);

    for (const auto& algo : algos) {
        InferOptions opt = base_opt;
        opt.algo = algo;
        for (size_t idx = 0; idx < data.items.size(); ++idx) {
            LabeledDataset one;
            one.label_space = data.label_space;
            one.items.push_back(data.items[idx]);
            auto t0 = std::chrono::steady_clock::now();
            InferenceOutput out = run_inference(loaded, one, opt, nullptr);
            double wall_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();

            CrfModel crf = item_crf(loaded, data.items[idx]);
            double acc = accuracy(out.labels.front(), data.items[idx].gold);
            double energy = gibbs_energy(out.labels.front(), crf);
            std::string linf = "";
            if (configuration_count(crf) <= kDefaultEnumerationCap) {
                ExactResult exact = enumerate_exact(crf);
                linf = std::to_string(
                    (out.marginals.front().q - exact.marginals.q).cwiseAbs().maxCoeff());
            }
            report << algo << "," << idx << "," << acc << "," << energy << "," << linf << ","
                   << wall_ms << "\n";
        }
    }
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gold_path) {
    auto pred = load_labelings(pred_path);
    auto gold = load_labelings(gold_path);
    if (pred.size() != gold.size())
        throw ShapeError("prediction/gold item counts differ: " + std::to_string(pred.size()) +
                         " vs " + std::to_string(gold.size()));
    double total = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) total += accuracy(pred[i], gold[i]);
    std::cout << total / pred.size() << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Mean-field CRF inference and residual graph-attention (CRF-GAT) toolkit"};
    app.require_subcommand(1);

    std::string spec_path, out_path, labels_csv;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic labeled dataset");
    gen->add_option("--spec", spec_path, "Synthetic spec JSON")->required();
    gen->add_option("--out", out_path, "Output dataset JSON")->required();
    gen->add_option("--labels-csv", labels_csv, "Also dump the first item's gold labels as CSV");

    InferOptions iopt;
    auto* infer = app.add_subcommand("infer", "Run inference on a dataset");
    infer->add_option("--model", iopt.model_path, "Model JSON (crf or crf_gat)")->required();
    infer->add_option("--data", iopt.data_path, "Dataset JSON")->required();
    infer->add_option("--algo", iopt.algo, "mf | mf-seq | gat | exact | gibbs")->required();
    infer->add_option("--out", iopt.out_path, "Inference output JSON")->required();
    infer->add_option("--max-iter", iopt.max_iter, "Mean-field iteration cap");
    infer->add_option("--tol", iopt.tol, "Mean-field convergence tolerance");
    infer->add_option("--seed", iopt.seed, "Sampler seed");
    infer->add_option("--sweeps", iopt.sweeps, "Gibbs sweeps");
    infer->add_option("--burn-in", iopt.burn_in, "Gibbs burn-in sweeps");
    infer->add_option("--trace", iopt.trace_path, "Write the L-inf trace CSV (first item)");

    std::string model_path, data_path, config_path, trained_path, loss_trace_path;
    auto* tr = app.add_subcommand("train", "Train a crf_gat model end to end");
    tr->add_option("--model", model_path, "Initial crf_gat model JSON")->required();
    tr->add_option("--data", data_path, "Training dataset JSON")->required();
    tr->add_option("--config", config_path, "Training config JSON")->required();
    tr->add_option("--out", trained_path, "Trained model JSON")->required();
    tr->add_option("--loss-trace", loss_trace_path, "Per-epoch loss CSV")->required();

    std::string cmp_model, cmp_data, cmp_algos, cmp_report;
    InferOptions cmp_opt;
    auto* cmp = app.add_subcommand("compare", "Compare algorithms on one dataset");
    cmp->add_option("--model", cmp_model, "Model JSON")->required();
    cmp->add_option("--data", cmp_data, "Dataset JSON")->required();
    cmp->add_option("--algos", cmp_algos, "Comma-separated algorithm list")->required();
    cmp->add_option("--report", cmp_report, "Report CSV path")->required();
    cmp->add_option("--max-iter", cmp_opt.max_iter, "Mean-field iteration cap");
    cmp->add_option("--tol", cmp_opt.tol, "Mean-field convergence tolerance");
    cmp->add_option("--seed", cmp_opt.seed, "Sampler seed");
    cmp->add_option("--sweeps", cmp_opt.sweeps, "Gibbs sweeps");
    cmp->add_option("--burn-in", cmp_opt.burn_in, "Gibbs burn-in sweeps");

    std::string pred_path, gold_path;
    auto* ev = app.add_subcommand("eval", "Print mean accuracy of predictions against gold");
    ev->add_option("--pred", pred_path, "Inference output JSON")->required();
    ev->add_option("--gold", gold_path, "Dataset or inference output JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return cmd_gen(spec_path, out_path, labels_csv);
        if (infer->parsed()) {
            LoadedModel loaded = load_model(iopt.model_path);
            LabeledDataset data = load_dataset(iopt.data_path);
            std::vector<double> trace;
            InferenceOutput out =
                run_inference(loaded, data, iopt, iopt.trace_path.empty() ? nullptr : &trace);
            save_inference(out, iopt.out_path);
            if (!iopt.trace_path.empty()) save_trace_csv(trace, iopt.trace_path);
            return 0;
        }
        if (tr->parsed())
            return cmd_train(model_path, data_path, config_path, trained_path, loss_trace_path);
        if (cmp->parsed()) return cmd_compare(cmp_model, cmp_data, cmp_algos, cmp_report, cmp_opt);
        if (ev->parsed()) return cmd_eval(pred_path, gold_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace crfgat
