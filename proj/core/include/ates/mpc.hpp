#pragma once

#include "ates/plant.hpp"
#include "ates/predictor.hpp"
#include "ates/qp.hpp"
#include "ates/sysid.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <string>
#include <vector>

namespace ates {

struct OcpConfig {
    int N = 720;               // prediction horizon, steps
    Eigen::Vector3d y_upper;   // per-output upper bounds, K
    Eigen::Vector3d y_lower;   // K
    double q_min = -100.0;     // m^3/h
    double q_max = 100.0;
    double Q_weight = 1.0;     // tracking weight (T_b channel)
    double R_weight = 0.01;    // input weight
    double w_weight = 1.0;     // slack penalty

    static OcpConfig defaults(); // bounds (30,25,11.7)/(0,11.7,0) degC in K

    void validate() const;
};

// Condensed horizon model: stacked outputs over steps 0..N (step 0 is the
// current measurement anchor), y = Phi q + gamma with q the N future flows.
struct HorizonProblem {
    Eigen::MatrixXd Phi;    // p(N+1) x N
    Eigen::VectorXd gamma;  // p(N+1); free response under q = 0
    Eigen::VectorXd y_ref;  // p(N+1); non-tracked entries carry the free response
    int N = 0, p = 0;
};

// Eliminates the predicted outputs through the causal ARX recursion. The
// history follows the controller convention of rollout_controlled
// (h.y[0] = current measurement). tr_forecast supplies T_r for steps 0..N-1.
HorizonProblem condense(const ArxParams& par, const History& h,
                        const Eigen::VectorXd& tr_forecast, int N);

// Decision vector (q_N, eps_N) with eps of length p(N+1): hard box on q, soft
// output boxes, eps >= 0, quadratic tracking on the T_b rows only.
Qp build_ocp(const HorizonProblem& hp, const OcpConfig& cfg);

double delivered_power(double T_b, double T_r, const PlantParams& p); // W

struct MpcStepResult {
    double q_star = 0.0;     // first input move, clamped to bounds
    double solve_ms = 0.0;
    double eps_max = 0.0;    // largest slack, K
    QpStatus status = QpStatus::MaxIter;
    int iterations = 0;
    bool max_iter_warning = false;
};

// Receding-horizon controller; builds the condensed sensitivities and the QP
// structure once and reuses the KKT factorization across steps.
class MpcController {
  public:
    MpcController(const ArxParams& par, const OcpConfig& cfg,
                  const QpSettings& qs = mpc_qp_settings());

    // tb_ref has N+1 entries (anchor first); tr_forecast has N entries.
    MpcStepResult step(const History& h, const Eigen::VectorXd& tr_forecast,
                       const Eigen::VectorXd& tb_ref);

    const Eigen::MatrixXd& Phi() const { return Phi_; }
    static QpSettings mpc_qp_settings();

  private:
    ArxParams par_;
    OcpConfig cfg_;
    Eigen::MatrixXd Phi_;     // p(N+1) x N
    Eigen::MatrixXd Phi_b_;   // (N+1) x N, T_b rows
    std::unique_ptr<QpSolver> solver_;
    Eigen::VectorXd warm_x_, warm_z_;
    bool have_warm_ = false;
};

// One-shot variant of the receding-horizon step (spec-level convenience).
MpcStepResult mpc_step(const ArxParams& par, const History& h,
                       const Eigen::VectorXd& tr_forecast,
                       const Eigen::VectorXd& tb_ref, const OcpConfig& cfg);

struct TrajectoryLog {
    double dt = 60.0;
    std::vector<double> t, q, T_r, T_b, T_w, T_c, T_b_ref, demand_W, delivered_W,
        solve_ms, eps_max;
    double mean_solve_ms = 0.0, max_solve_ms = 0.0, max_eps = 0.0;
};

void write_trajectory_csv(const TrajectoryLog& log, const std::string& path);

struct ClosedLoopConfig {
    OcpConfig ocp;
    double margin = 1.05;       // setpoint over-provisioning factor
    int warmup_steps = 0;       // storing steps before control starts (fills history)
};

// Alternates mpc_step and plant_step with noise disabled. demand_W has one
// entry per control step; tr_profile must cover duration + N steps.
TrajectoryLog closed_loop(Plant& plant, const ArxParams& par,
                          const ClosedLoopConfig& cfg,
                          const std::vector<double>& demand_W,
                          const std::vector<double>& tr_profile);

} // namespace ates
