#include <benchmark/benchmark.h>

#include "opiniondrift/analysis.hpp"
#include "opiniondrift/flow.hpp"
#include "opiniondrift/measure.hpp"
#include "opiniondrift/oracle.hpp"
#include "opiniondrift/simulate.hpp"

namespace od = opiniondrift;

static void BM_WindowMomentsQuery(benchmark::State& state) {
    const auto part = od::OpinionPartition::from_uniform(-1.0, 1.0, 1.0,
                                                         static_cast<std::size_t>(state.range(0)));
    const od::MomentTable table(part);
    double a = -0.37;
    for (auto _ : state) {
        benchmark::DoNotOptimize(table.window_moments(a, a + 0.2));
        a = a > 0.7 ? -0.9 : a + 1e-3;
    }
}
BENCHMARK(BM_WindowMomentsQuery)->Arg(4000)->Arg(32000);

static void BM_PushForward(benchmark::State& state) {
    const auto part = od::OpinionPartition::from_uniform(-1.0, 1.0, 1.0,
                                                         static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        od::FlowContext ctx(part, std::nullopt, 0.1);
        benchmark::DoNotOptimize(od::push_forward(ctx));
    }
}
BENCHMARK(BM_PushForward)->Arg(1000)->Arg(4000);

static void BM_SimulateStep(benchmark::State& state) {
    const auto part = od::OpinionPartition::from_uniform(-1.0, 1.0, 1.0, 4000);
    od::SimulationConfig cfg;
    cfg.r = 0.1;
    cfg.max_steps = 1;
    const auto sched =
        od::InputSchedule::constant(od::make_truncated_gaussian(0.2, 0.1, 1.0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(od::step(part, cfg, sched, 1));
    }
}
BENCHMARK(BM_SimulateStep);

static void BM_AgentStep(benchmark::State& state) {
    const auto part = od::OpinionPartition::from_uniform(-1.0, 1.0, 1.0, 1000);
    const auto pop = od::sample_agents(part, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(od::agent_step(pop, std::nullopt, 0.1));
    }
}
BENCHMARK(BM_AgentStep)->Arg(20000);

BENCHMARK_MAIN();
