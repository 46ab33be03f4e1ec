#include "modalforge/excitation.hpp"
#include "modalforge/ga.hpp"
#include "modalforge/gnn.hpp"
#include "modalforge/sdof.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>
#include <memory>

using namespace modalforge;

namespace {

excitation::ExcitationSpec fixture() {
    static const auto rec =
        excitation::load_ground_motion(std::filesystem::path(MODALFORGE_SOURCE_DIR) / "data" / "synthetic_ns_dt002.txt");
    return excitation::BaseRecord{rec, 1.0};
}

void newmark_solve(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const dyno::SdofSystem sys(3.5, 520.0, 8.0);
    const auto p = excitation::synthesize_force(fixture(), sys.mass(), 0.02, n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dyno::newmark_solve(sys, {}, p, {.dt = 0.02}));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(newmark_solve)->Arg(501)->Arg(2001)->Arg(8001);

void direct_fitness(benchmark::State& state) {
    const auto f = ga::direct_fitness(fixture(), 0.02, 40.0);
    for (auto _ : state) benchmark::DoNotOptimize(f(3.5, 520.0, 8.0));
}
BENCHMARK(direct_fitness);

void surrogate_fitness(benchmark::State& state) {
    gnn::Architecture arch;
    arch.hidden = static_cast<std::size_t>(state.range(0));
    const auto model = std::make_shared<const gnn::GnnModel>(gnn::GnnModel::initialized(arch, gnn::NormStats{}, 1));
    const auto f = ga::surrogate_fitness(model);
    for (auto _ : state) benchmark::DoNotOptimize(f(3.5, 520.0, 8.0));
}
BENCHMARK(surrogate_fitness)->Arg(8)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
