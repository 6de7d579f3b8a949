#pragma once

#include "ates/dataset.hpp"
#include "ates/sysid.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ates {

// Rolling buffers of the last sigma inputs/outputs, newest first:
// u[0] = u(t_{k-1}), y[0] = y(t_{k-1}).
struct History {
    std::vector<Eigen::VectorXd> u;
    std::vector<Eigen::VectorXd> y;

    // History ending just before row k of the dataset (uses rows k-sigma .. k-1).
    static History from_data(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y,
                             long k, int sigma);
    void push(const Eigen::VectorXd& u_new, const Eigen::VectorXd& y_new);
};

struct ErrorStats {
    Eigen::VectorXd mean;   // per output, K
    Eigen::VectorXd stddev; // sample std (ddof = 1)
    Eigen::VectorXd mae;    // maximal absolute error
};

ErrorStats error_stats(const Eigen::MatrixXd& errors);

Eigen::VectorXd predict_one(const ArxParams& par, const History& h);

// One-step-ahead errors yhat(t_k) - y(t_k) for k = sigma .. N-1; (N-sigma) x p.
Eigen::MatrixXd prediction_errors(const ArxParams& par, const Dataset& ds);
ErrorStats validate_single_step(const ArxParams& par, const Dataset& ds);

// Open-loop multi-step prediction: iterates predict_one feeding predictions back
// into the output history. u_future rows are (q, T_r) for steps 1..N.
Eigen::MatrixXd rollout(const ArxParams& par, const History& h0,
                        const Eigen::MatrixXd& u_future);

// Controller-side variant: h.y[0] is the current measurement y(t_k) and
// u_future row j supplies u(t_{k+j}), i.e. the input of the step being decided.
// Row j of the result is the prediction for t_{k+j+1}.
Eigen::MatrixXd rollout_controlled(const ArxParams& par, const History& h0,
                                   const Eigen::MatrixXd& u_future);

struct HorizonProfile {
    Eigen::MatrixXd mean;   // N x p, per horizon step
    Eigen::MatrixXd stddev; // N x p
    int n_samples = 0;
};

// Rolls out n_samples windows of length N against recorded truth. Windows are
// non-overlapping when the dataset allows it, otherwise evenly strided.
HorizonProfile horizon_error_profile(const ArxParams& par, const Dataset& ds, int N,
                                     int n_samples);

void write_errors_csv(const Eigen::MatrixXd& errors, const std::string& path);
void write_profile_csv(const HorizonProfile& prof, const std::string& path);

} // namespace ates
