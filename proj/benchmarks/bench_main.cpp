#include <benchmark/benchmark.h>

#include <cmath>

#include "isingclt/bound.hpp"
#include "isingclt/exact.hpp"
#include "isingclt/glauber.hpp"
#include "isingclt/lattice.hpp"
#include "isingclt/wasserstein.hpp"

using namespace isingclt;

namespace {

IsingModel chain(std::size_t n) { return build_box_model(chain_spec(n, 0.3, 0.1)); }

void BM_LogPartition(benchmark::State& state) {
    const IsingModel m = chain(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(log_partition(m));
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}
BENCHMARK(BM_LogPartition)->DenseRange(12, 20, 4)->Unit(benchmark::kMillisecond);

void BM_Moments(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const IsingModel m = chain(n);
    const DirectionVector theta = DirectionVector::uniform(n);
    for (auto _ : state) benchmark::DoNotOptimize(moments(m, theta));
    state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}
BENCHMARK(BM_Moments)->DenseRange(8, 16, 4)->Unit(benchmark::kMillisecond);

void BM_ProjectionPmf(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const IsingModel m = chain(n);
    const DirectionVector theta = DirectionVector::uniform(n);
    for (auto _ : state) {
        const ProjectionPmf pmf = exact_pmf_of_projection(m, theta);
        benchmark::DoNotOptimize(w2_discrete_vs_normal(pmf, NormalParams(pmf.mean(), std::sqrt(pmf.variance()))));
    }
}
BENCHMARK(BM_ProjectionPmf)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ContractedStatistic(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const IsingModel m = chain(n);
    const DirectionVector theta = DirectionVector::uniform(n);
    for (auto _ : state) benchmark::DoNotOptimize(contracted_statistic(m, theta));
}
BENCHMARK(BM_ContractedStatistic)->Arg(8)->Arg(12)->Unit(benchmark::kMicrosecond);

void BM_GlauberSteps(benchmark::State& state) {
    const IsingModel m = dobrushin_ferromagnet(static_cast<std::size_t>(state.range(0)), 0.5, 3, 0.0, 1);
    ChainConfig c;
    c.steps = 100000;
    c.burn_in = 0;
    c.track_pairs = false;
    for (auto _ : state) benchmark::DoNotOptimize(run_chain(m, c));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.steps));
}
BENCHMARK(BM_GlauberSteps)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CoupledPair(benchmark::State& state) {
    const IsingModel m = dobrushin_ferromagnet(static_cast<std::size_t>(state.range(0)), 0.5, 3, 0.0, 1);
    ChainConfig c;
    c.steps = 100000;
    c.burn_in = 0;
    c.track_pairs = false;
    for (auto _ : state) benchmark::DoNotOptimize(monotone_coupled_pair(m, 0, c));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.steps));
}
BENCHMARK(BM_CoupledPair)->Arg(30)->Arg(120)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
