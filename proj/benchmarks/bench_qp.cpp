#include <benchmark/benchmark.h>

#include "ates/mpc.hpp"
#include "ates/qp.hpp"

#include <random>

using namespace ates;

namespace {

Qp random_box_qp(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd G(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) G(r, c) = gauss(rng);
    Eigen::MatrixXd H = G.transpose() * G + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = gauss(rng);
    return Qp::make(std::move(H), std::move(g), Eigen::MatrixXd::Identity(n, n),
                    Eigen::VectorXd::Constant(n, -1.0), Eigen::VectorXd::Constant(n, 1.0));
}

ArxParams bench_arx() {
    ArxParams par;
    par.sigma = 3;
    par.p = 3;
    par.m = 2;
    for (int i = 0; i < 3; ++i) {
        par.A.push_back(0.05 / (i + 1) * Eigen::MatrixXd::Identity(3, 3));
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3, 2);
        B(0, 0) = 0.01;
        B(0, 1) = 0.3;
        par.B.push_back(B);
    }
    par.u_mean = Eigen::Vector2d(20.0, 278.0);
    par.y_mean = Eigen::Vector3d(278.5, 286.0, 281.0);
    return par;
}

} // namespace

static void BM_RandomBoxQp(benchmark::State& state) {
    const int n = int(state.range(0));
    const Qp qp = random_box_qp(n, 42);
    for (auto _ : state) {
        const QpSolution s = solve_qp(qp);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_RandomBoxQp)->Arg(10)->Arg(50)->Arg(200)->Unit(benchmark::kMicrosecond);

static void BM_MpcStepN720(benchmark::State& state) {
    const ArxParams par = bench_arx();
    OcpConfig cfg = OcpConfig::defaults();
    cfg.R_weight = 1e-5;
    MpcController ctrl(par, cfg);

    History h;
    for (int i = 0; i < par.sigma; ++i) {
        h.u.push_back(par.u_mean);
        h.y.push_back(par.y_mean);
    }
    const Eigen::VectorXd tr = Eigen::VectorXd::Constant(cfg.N, par.u_mean(1));
    const Eigen::VectorXd ref = Eigen::VectorXd::Constant(cfg.N + 1, par.y_mean(0) + 0.5);
    for (auto _ : state) {
        const MpcStepResult res = ctrl.step(h, tr, ref);
        benchmark::DoNotOptimize(res);
    }
}
BENCHMARK(BM_MpcStepN720)->Unit(benchmark::kMillisecond)->Iterations(5);

BENCHMARK_MAIN();
