#include "ates/mpc.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ates {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Response of the output deviation to a unit flow impulse at step 0; row t is
// the response at step t+1.
Eigen::MatrixXd flow_impulse_response(const ArxParams& par, int N) {
    History h;
    h.u.assign(par.sigma, par.u_mean); // zero-deviation operating point
    h.y.assign(par.sigma, par.y_mean);
    Eigen::MatrixXd U(N, par.m);
    U.rowwise() = par.u_mean.transpose();
    U(0, 0) += 1.0;
    Eigen::MatrixXd resp = rollout_controlled(par, h, U);
    resp.rowwise() -= par.y_mean.transpose();
    return resp;
}
} // namespace

OcpConfig OcpConfig::defaults() {
    OcpConfig c;
    c.y_upper = Eigen::Vector3d(30.0, 25.0, 11.7).array() + 273.15;
    c.y_lower = Eigen::Vector3d(0.0, 11.7, 0.0).array() + 273.15;
    return c;
}

void OcpConfig::validate() const {
    if (N < 1) throw std::invalid_argument("ocp config: N must be >= 1");
    if (Q_weight < 0 || R_weight < 0 || w_weight < 0)
        throw std::invalid_argument("ocp config: weights must be >= 0");
    if (!(q_min < q_max)) throw std::invalid_argument("ocp config: need q_min < q_max");
}

HorizonProblem condense(const ArxParams& par, const History& h,
                        const Eigen::VectorXd& tr_forecast, int N) {
    if (tr_forecast.size() < N) throw std::invalid_argument("condense: forecast too short");
    if (int(h.u.size()) != par.sigma || int(h.y.size()) != par.sigma)
        throw std::invalid_argument("condense: history buffers must hold sigma entries");
    const int p = par.p;

    HorizonProblem hp;
    hp.N = N;
    hp.p = p;
    hp.Phi = Eigen::MatrixXd::Zero(p * (N + 1), N);
    const Eigen::MatrixXd g = flow_impulse_response(par, N);
    for (int j = 0; j < N; ++j)
        for (int i = j + 1; i <= N; ++i)
            hp.Phi.block(i * p, j, p, 1) = g.row(i - 1 - j).transpose();

    Eigen::MatrixXd U0 = Eigen::MatrixXd::Zero(N, par.m);
    if (par.m >= 2) U0.col(1) = tr_forecast.head(N);
    const Eigen::MatrixXd free_resp = rollout_controlled(par, h, U0);
    hp.gamma.resize(p * (N + 1));
    hp.gamma.head(p) = h.y[0];
    for (int i = 1; i <= N; ++i) hp.gamma.segment(i * p, p) = free_resp.row(i - 1);
    hp.y_ref = hp.gamma; // no preference by default; caller overwrites tracked rows
    return hp;
}

Qp build_ocp(const HorizonProblem& hp, const OcpConfig& cfg) {
    cfg.validate();
    if (hp.N != cfg.N)
        throw std::invalid_argument("build_ocp: horizon problem and config disagree on N");
    const int N = hp.N, p = hp.p, ny = p * (N + 1);
    const int n = N + ny; // (q_N, eps_N)
    const int k = N + 3 * ny;

    // T_b rows of the stacked output (channel 0)
    Eigen::MatrixXd Phi_b(N + 1, N);
    Eigen::VectorXd gamma_b(N + 1), ref_b(N + 1);
    for (int i = 0; i <= N; ++i) {
        Phi_b.row(i) = hp.Phi.row(i * p);
        gamma_b[i] = hp.gamma[i * p];
        ref_b[i] = hp.y_ref[i * p];
    }

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    H.topLeftCorner(N, N) =
        2.0 * (cfg.R_weight * Eigen::MatrixXd::Identity(N, N) +
               cfg.Q_weight * Phi_b.transpose() * Phi_b);
    Eigen::VectorXd g(n);
    g.head(N) = 2.0 * cfg.Q_weight * Phi_b.transpose() * (gamma_b - ref_b);
    g.tail(ny).setConstant(cfg.w_weight);

    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(k, n);
    Eigen::VectorXd lb(k), ub(k);
    C.topLeftCorner(N, N).setIdentity();
    lb.head(N).setConstant(cfg.q_min);
    ub.head(N).setConstant(cfg.q_max);

    Eigen::VectorXd yup(ny), ylo(ny);
    for (int i = 0; i <= N; ++i) {
        yup.segment(i * p, p) = cfg.y_upper.head(p);
        ylo.segment(i * p, p) = cfg.y_lower.head(p);
    }
    C.block(N, 0, ny, N) = hp.Phi;
    C.block(N, N, ny, ny) = -Eigen::MatrixXd::Identity(ny, ny);
    lb.segment(N, ny).setConstant(-kInf);
    ub.segment(N, ny) = yup - hp.gamma;

    C.block(N + ny, 0, ny, N) = hp.Phi;
    C.block(N + ny, N, ny, ny) = Eigen::MatrixXd::Identity(ny, ny);
    lb.segment(N + ny, ny) = ylo - hp.gamma;
    ub.segment(N + ny, ny).setConstant(kInf);

    C.block(N + 2 * ny, N, ny, ny) = Eigen::MatrixXd::Identity(ny, ny);
    lb.tail(ny).setZero();
    ub.tail(ny).setConstant(kInf);

    Qp qp;
    qp.H = std::move(H);
    qp.g = std::move(g);
    qp.C = std::move(C);
    qp.lb = std::move(lb);
    qp.ub = std::move(ub);
    return qp;
}

double delivered_power(double T_b, double T_r, const PlantParams& p) {
    return p.c_w * p.V_b * (T_b - T_r);
}

QpSettings MpcController::mpc_qp_settings() {
    QpSettings qs;
    // Control-grade accuracy: the first move is applied at 0.1 m^3/h
    // resolution, and warm starts refine the trajectory across steps.
    qs.eps_abs = 2e-3;
    qs.eps_rel = 2e-3;
    qs.max_iter = 3000;
    qs.check_interval = 10;
    return qs;
}

MpcController::MpcController(const ArxParams& par, const OcpConfig& cfg,
                             const QpSettings& qs)
    : par_(par), cfg_(cfg) {
    cfg_.validate();
    const int N = cfg_.N, p = par_.p, ny = p * (N + 1);
    const int n = N + ny, k = N + 3 * ny;

    Phi_ = Eigen::MatrixXd::Zero(ny, N);
    const Eigen::MatrixXd g = flow_impulse_response(par_, N);
    for (int j = 0; j < N; ++j)
        for (int i = j + 1; i <= N; ++i)
            Phi_.block(i * p, j, p, 1) = g.row(i - 1 - j).transpose();
    Phi_b_.resize(N + 1, N);
    for (int i = 0; i <= N; ++i) Phi_b_.row(i) = Phi_.row(i * p);

    using T = Eigen::Triplet<double>;
    std::vector<T> ht;
    const Eigen::MatrixXd Hqq =
        2.0 * (cfg_.R_weight * Eigen::MatrixXd::Identity(N, N) +
               cfg_.Q_weight * Phi_b_.transpose() * Phi_b_);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (Hqq(i, j) != 0.0) ht.emplace_back(i, j, Hqq(i, j));
    Eigen::SparseMatrix<double> H(n, n);
    H.setFromTriplets(ht.begin(), ht.end());

    std::vector<T> ct;
    ct.reserve(size_t(N) + 2 * size_t(Phi_.rows()) * 4 + 3 * size_t(ny));
    for (int i = 0; i < N; ++i) ct.emplace_back(i, i, 1.0);
    for (int r = 0; r < ny; ++r)
        for (int j = 0; j < N; ++j)
            if (Phi_(r, j) != 0.0) {
                ct.emplace_back(N + r, j, Phi_(r, j));
                ct.emplace_back(N + ny + r, j, Phi_(r, j));
            }
    for (int r = 0; r < ny; ++r) {
        ct.emplace_back(N + r, N + r, -1.0);
        ct.emplace_back(N + ny + r, N + r, 1.0);
        ct.emplace_back(N + 2 * ny + r, N + r, 1.0);
    }
    Eigen::SparseMatrix<double> C(k, n);
    C.setFromTriplets(ct.begin(), ct.end());

    solver_ = std::make_unique<QpSolver>(H, C, qs);
}

MpcStepResult MpcController::step(const History& h, const Eigen::VectorXd& tr_forecast,
                                  const Eigen::VectorXd& tb_ref) {
    const int N = cfg_.N, p = par_.p, ny = p * (N + 1);
    if (tb_ref.size() != N + 1)
        throw std::invalid_argument("mpc step: tb_ref must have N+1 entries");
    const auto t0 = std::chrono::steady_clock::now();

    Eigen::MatrixXd U0 = Eigen::MatrixXd::Zero(N, par_.m);
    if (par_.m >= 2) U0.col(1) = tr_forecast.head(N);
    const Eigen::MatrixXd free_resp = rollout_controlled(par_, h, U0);
    Eigen::VectorXd gamma(ny), gamma_b(N + 1);
    gamma.head(p) = h.y[0];
    for (int i = 1; i <= N; ++i) gamma.segment(i * p, p) = free_resp.row(i - 1);
    for (int i = 0; i <= N; ++i) gamma_b[i] = gamma[i * p];

    Eigen::VectorXd g(N + ny);
    g.head(N) = 2.0 * cfg_.Q_weight * Phi_b_.transpose() * (gamma_b - tb_ref);
    g.tail(ny).setConstant(cfg_.w_weight);

    Eigen::VectorXd yup(ny), ylo(ny);
    for (int i = 0; i <= N; ++i) {
        yup.segment(i * p, p) = cfg_.y_upper;
        ylo.segment(i * p, p) = cfg_.y_lower;
    }
    Eigen::VectorXd lb(N + 3 * ny), ub(N + 3 * ny);
    lb.head(N).setConstant(cfg_.q_min);
    ub.head(N).setConstant(cfg_.q_max);
    lb.segment(N, ny).setConstant(-kInf);
    ub.segment(N, ny) = yup - gamma;
    lb.segment(N + ny, ny) = ylo - gamma;
    ub.segment(N + ny, ny).setConstant(kInf);
    lb.tail(ny).setZero();
    ub.tail(ny).setConstant(kInf);

    QpSolution sol = have_warm_ ? solver_->solve(g, lb, ub, warm_x_, warm_z_)
                                : solver_->solve(g, lb, ub);
    if (sol.status == QpStatus::PrimalInfeasible)
        throw std::runtime_error("mpc step: QP reported primal infeasibility");
    warm_x_ = sol.x;
    warm_z_ = sol.z;
    have_warm_ = true;

    MpcStepResult res;
    res.q_star = std::clamp(sol.x[0], cfg_.q_min, cfg_.q_max);
    res.eps_max = sol.x.tail(ny).maxCoeff();
    res.status = sol.status;
    res.iterations = sol.iterations;
    res.max_iter_warning = sol.status == QpStatus::MaxIter;
    res.solve_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    return res;
}

MpcStepResult mpc_step(const ArxParams& par, const History& h,
                       const Eigen::VectorXd& tr_forecast,
                       const Eigen::VectorXd& tb_ref, const OcpConfig& cfg) {
    MpcController ctrl(par, cfg);
    return ctrl.step(h, tr_forecast, tb_ref);
}

TrajectoryLog closed_loop(Plant& plant, const ArxParams& par,
                          const ClosedLoopConfig& cfg,
                          const std::vector<double>& demand_W,
                          const std::vector<double>& tr_profile) {
    const int N = cfg.ocp.N;
    const int duration = int(demand_W.size());
    if (int(tr_profile.size()) < duration + N)
        throw std::invalid_argument("closed_loop: tr_profile must cover duration + N steps");
    const PlantParams& pp = plant.params();
    const double ref_gain = 1.0 / (pp.c_w * pp.V_b);

    MpcController ctrl(par, cfg.ocp);

    // fill the history with storing steps (no noise in the closed loop)
    History h;
    const int warmup = std::max(cfg.warmup_steps, par.sigma);
    for (int k = 0; k < warmup; ++k) {
        const Eigen::Vector3d y = plant.step({0.0, tr_profile[0]}, false);
        Eigen::Vector2d u(0.0, tr_profile[0]);
        h.u.insert(h.u.begin(), u);
        h.y.insert(h.y.begin(), y);
        if (int(h.u.size()) > par.sigma) {
            h.u.pop_back();
            h.y.pop_back();
        }
    }

    TrajectoryLog log;
    log.dt = pp.dt;
    auto demand_at = [&](int k) { return demand_W[std::min(k, duration - 1)]; };

    for (int k = 0; k < duration; ++k) {
        Eigen::VectorXd tr_fc = Eigen::Map<const Eigen::VectorXd>(&tr_profile[k], N);
        // The prediction at step j covers delivery over [t_{k+j-1}, t_{k+j}),
        // which is priced against the return temperature and demand at k+j-1.
        Eigen::VectorXd tb_ref(N + 1);
        for (int j = 0; j <= N; ++j) {
            const int i = k + std::max(0, j - 1);
            tb_ref[j] = tr_profile[i] + cfg.margin * demand_at(std::max(0, j - 1) + k) * ref_gain;
        }
        const MpcStepResult res = ctrl.step(h, tr_fc, tb_ref);

        const double q = res.q_star;
        const Eigen::Vector3d y = plant.step({q, tr_profile[k]}, false);
        h.u.insert(h.u.begin(), Eigen::Vector2d(q, tr_profile[k]));
        h.u.pop_back();
        h.y.insert(h.y.begin(), y);
        h.y.pop_back();

        log.t.push_back(k * pp.dt);
        log.q.push_back(q);
        log.T_r.push_back(tr_profile[k]);
        log.T_b.push_back(y[0]);
        log.T_w.push_back(y[1]);
        log.T_c.push_back(y[2]);
        log.T_b_ref.push_back(tb_ref[0]);
        log.demand_W.push_back(demand_W[k]);
        log.delivered_W.push_back(delivered_power(y[0], tr_profile[k], pp));
        log.solve_ms.push_back(res.solve_ms);
        log.eps_max.push_back(res.eps_max);
    }

    if (!log.solve_ms.empty()) {
        log.mean_solve_ms = std::accumulate(log.solve_ms.begin(), log.solve_ms.end(), 0.0) /
                            double(log.solve_ms.size());
        log.max_solve_ms = *std::max_element(log.solve_ms.begin(), log.solve_ms.end());
        log.max_eps = *std::max_element(log.eps_max.begin(), log.eps_max.end());
    }
    return log;
}

void write_trajectory_csv(const TrajectoryLog& log, const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "t,q,T_r,T_b,T_w,T_c,T_b_ref,demand_W,delivered_W,solve_ms,eps_max\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        f << ',' << buf;
    };
    for (size_t k = 0; k < log.t.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", log.t[k]);
        f << buf;
        put(log.q[k]); put(log.T_r[k]); put(log.T_b[k]); put(log.T_w[k]);
        put(log.T_c[k]); put(log.T_b_ref[k]); put(log.demand_W[k]);
        put(log.delivered_W[k]); put(log.solve_ms[k]); put(log.eps_max[k]);
        f << '\n';
    }
}

} // namespace ates
