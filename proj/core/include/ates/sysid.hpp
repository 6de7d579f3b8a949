#pragma once

#include "ates/dataset.hpp"

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ates {

struct InsufficientExcitation : std::runtime_error {
    InsufficientExcitation()
        : std::runtime_error("insufficient excitation: regression matrix is rank deficient") {}
};

// MIMO ARX predictor parameters. Prediction runs in deviation variables around
// the stored operating point (u_mean, y_mean):
//   yhat(k) = y_mean + sum_i B[i] (u(k-1-i) - u_mean) - A[i] (y(k-1-i) - y_mean)
struct ArxParams {
    int sigma = 0, p = 0, m = 0;
    std::vector<Eigen::MatrixXd> A; // sigma matrices, p x p
    std::vector<Eigen::MatrixXd> B; // sigma matrices, p x m
    Eigen::VectorXd u_mean;         // m
    Eigen::VectorXd y_mean;         // p
};

void save_arx_json(const ArxParams& par, const std::string& path);
ArxParams load_arx_json(const std::string& path);

// Stacked coefficient matrix Z = (B_1^T ... B_sigma^T, -A_1^T ... -A_sigma^T)^T,
// shape sigma(m+p) x p.
Eigen::MatrixXd pack_arx(const ArxParams& par);
ArxParams unpack_arx(const Eigen::MatrixXd& Z, int sigma, int m, int p,
                     const Eigen::VectorXd& u_mean, const Eigen::VectorXd& y_mean);

// Correlation estimator theta_fg(kappa) = 1/(N+1) sum_{k=1}^{N-kappa} f_k g_{k+kappa}
// for kappa >= 0; negative shifts by the convention theta_fg(-kappa) = theta_gf(kappa).
double xcorr(const Eigen::VectorXd& f, const Eigen::VectorXd& g, int kappa);

struct CorrelationSet {
    int P = 0;
    long N = 0; // sample count of the underlying signals
    std::map<int, Eigen::MatrixXd> theta_uu; // kappa -> m x m
    std::map<int, Eigen::MatrixXd> theta_uy; // kappa -> m x p
};

// All theta_uu / theta_uy for kappa in [-P, P], elementwise over channel pairs.
// U, Y are used as given (centering is the caller's responsibility).
CorrelationSet build_correlations(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y,
                                  int P);

struct CorrDecayReport {
    double max_abs = 0.0; // over shifts P+1 .. P+margin, all channel pairs
    double tol = 0.0;
    bool pass = true;
};

// Advisory check that correlations of the centered signals are close to zero
// beyond the shift bound P.
CorrDecayReport check_corr_decay(const Eigen::MatrixXd& Uc, const Eigen::MatrixXd& Yc,
                                 const CorrelationSet& cs, int margin_shifts, double tol);

// Correlation-domain regression M Z ~= V: block rows kappa = -P+sigma .. P, each
// with blocks [theta_uu(kappa-1) .. theta_uu(kappa-sigma),
//              theta_uy(kappa-1) .. theta_uy(kappa-sigma)].
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_corls_system(const CorrelationSet& cs,
                                                               int sigma);

// Raw-data regression: row k holds [u(k-1) .. u(k-sigma), y(k-1) .. y(k-sigma)],
// right-hand side y(k), for k = sigma .. N-1 (0-based).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_ls_system(const Eigen::MatrixXd& Uc,
                                                            const Eigen::MatrixXd& Yc,
                                                            int sigma);

// argmin_Z ||M Z - V||_F via orthogonal factorization. Throws
// InsufficientExcitation when smallest singular value < 1e-10 x largest.
Eigen::MatrixXd solve_frobenius_ls(const Eigen::MatrixXd& M, const Eigen::MatrixXd& V);

enum class IdMethod { LS, CORLS };

ArxParams identify(const Dataset& ds, int sigma, IdMethod method, int P = 0);
ArxParams identify(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y, int sigma,
                   IdMethod method, int P = 0);

} // namespace ates
