#include <benchmark/benchmark.h>

#include <random>

#include "crfgat/gat.hpp"
#include "crfgat/meanfield.hpp"
#include "crfgat/training.hpp"

using namespace crfgat;

namespace {

CrfModel make_model(int n, int k, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CrfModel m;
    m.label_space.num_labels = k;
    m.sequence.positions = Matrix::NullaryExpr(n, 2, [&] { return 3.0 * u(rng); });
    m.sequence.observations = Matrix::NullaryExpr(n, 2, [&] { return u(rng); });
    m.unary.psi = Matrix::NullaryExpr(n, k, [&] { return u(rng); });
    Matrix mu = Matrix::NullaryExpr(k, k, [&] { return std::abs(u(rng)); });
    m.compatibility.mu = (mu + mu.transpose()) / 2.0;
    m.compatibility.symmetric = true;
    m.kernel = GaussianBilateralKernel{{{1.0, 1.5, 1.0}, {0.5, 3.0, 0.7}}};
    return m;
}

void BM_KernelMatrix(benchmark::State& state) {
    CrfModel m = make_model(static_cast<int>(state.range(0)), 4);
    for (auto _ : state) benchmark::DoNotOptimize(kernel_matrix(m.sequence, m.kernel));
}
BENCHMARK(BM_KernelMatrix)->Arg(64)->Arg(256)->Arg(1024);

void BM_MeanFieldStep(benchmark::State& state) {
    CrfModel m = make_model(static_cast<int>(state.range(0)), 4);
    MarginalField q = init_marginals(m);
    for (auto _ : state) benchmark::DoNotOptimize(mf_step_eq7(q, m));
}
BENCHMARK(BM_MeanFieldStep)->Arg(64)->Arg(256)->Arg(1024);

void BM_GatForward(benchmark::State& state) {
    CrfModel crf = make_model(static_cast<int>(state.range(0)), 4);
    CrfGatModel model;
    model.label_space = crf.label_space;
    for (int i = 0; i < 4; ++i)
        model.layers.push_back(GatLayerParams{crf.compatibility, crf.kernel});
    for (auto _ : state)
        benchmark::DoNotOptimize(
            gat_forward(model, crf.sequence, crf.unary, /*keep_trace=*/false));
}
BENCHMARK(BM_GatForward)->Arg(64)->Arg(256)->Arg(1024);

void BM_GradAnalytic(benchmark::State& state) {
    CrfModel crf = make_model(static_cast<int>(state.range(0)), 3);
    CrfGatModel model;
    model.label_space = crf.label_space;
    for (int i = 0; i < 2; ++i)
        model.layers.push_back(GatLayerParams{crf.compatibility, crf.kernel});
    model.unary_params.weight = Matrix::Constant(2, 3, 0.1);
    model.unary_params.bias = Vector::Zero(3);
    LabeledDataset batch;
    batch.label_space = crf.label_space;
    LabeledExample ex;
    ex.sequence = crf.sequence;
    ex.gold.y.assign(crf.num_nodes(), 0);
    batch.items.push_back(std::move(ex));
    for (auto _ : state) benchmark::DoNotOptimize(grad_analytic(model, batch));
}
BENCHMARK(BM_GradAnalytic)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
