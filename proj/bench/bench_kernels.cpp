// Serial vs OpenMP projected SGD step.
//   bench_kernels --benchmark_filter=Step
// Args are (N, d, B).

#include <benchmark/benchmark.h>

#include "reuse/kernels.hpp"
#include "reuse/network.hpp"
#include "reuse/rng.hpp"

using namespace reuse;

namespace {

void step(benchmark::State& state, kernels::Backend backend) {
    const int N = static_cast<int>(state.range(0));
    const int d = static_cast<int>(state.range(1));
    const int B = static_cast<int>(state.range(2));
    auto st = network::init_network(N, d, 1.0, 1);
    network::ActivationOptions opt;
    opt.family = network::ActivationFamily::HermiteRademacher;
    opt.q = 3;
    network::assign_activations(st, opt, 1);
    Matrix X(B, d);
    Vector y(B);
    Stream rs(1, StreamPurpose::Probe);
    for (int i = 0; i < B; ++i) {
        for (int k = 0; k < d; ++k) X(i, k) = rs.normal();
        y[i] = rs.normal();
    }
    const Matrix proj = st.W;
    kernels::Workspace ws;
    for (auto _ : state) {
        kernels::sgd_step(st, X, y, 1e-6, kernels::LossMode::Squared, proj, backend, ws);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(N) * d * B);
}

void shapes(benchmark::internal::Benchmark* b) {
    b->Args({512, 128, 1})->Args({512, 128, 8})->Args({512, 128, 64})->Args({2048, 256, 1})->Args({2048, 256, 64});
    b->Unit(benchmark::kMicrosecond)->UseRealTime();
}

void StepSerial(benchmark::State& s) { step(s, kernels::Backend::Serial); }
void StepOpenMP(benchmark::State& s) { step(s, kernels::Backend::OpenMP); }

}  // namespace

BENCHMARK(StepSerial)->Apply(shapes);
BENCHMARK(StepOpenMP)->Apply(shapes);

BENCHMARK_MAIN();
