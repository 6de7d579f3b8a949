#include <benchmark/benchmark.h>

#include "ates/datagen.hpp"
#include "ates/plant.hpp"

using namespace ates;

static void BM_PdeStep(benchmark::State& state) {
    PlantParams p;
    p.lambda = Eigen::VectorXd::Constant(p.n_cells, 4.0);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(p.n_cells + 1, p.T_amb);
    x(0) += 5.0;
    for (auto _ : state) {
        x = pde_step(x, 50.0, 290.0, p);
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_PdeStep);

static void BM_PlantStep(benchmark::State& state) {
    PlantParams p;
    Plant plant(p, 1);
    const auto q = excitation_flow(4096, 2);
    const auto tr = return_temp_profile(4096, 3);
    size_t k = 0;
    for (auto _ : state) {
        const Eigen::Vector3d y = plant.step({q[k % 4096], tr[k % 4096]}, false);
        benchmark::DoNotOptimize(y);
        ++k;
    }
}
BENCHMARK(BM_PlantStep);

static void BM_SimulateDay(benchmark::State& state) {
    PlantParams p;
    DatagenConfig cfg;
    cfg.n_train = 1440;
    cfg.n_val = 1;
    cfg.burn_in = 0;
    for (auto _ : state) {
        auto ds = simulate_dataset(p, cfg, 7);
        benchmark::DoNotOptimize(ds);
    }
}
BENCHMARK(BM_SimulateDay)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
