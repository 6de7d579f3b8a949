#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <string>

namespace ates {

// Convex QP: minimize 1/2 x'Hx + g'x subject to lb <= Cx <= ub
// (equality rows encoded as lb = ub).
struct Qp {
    Eigen::MatrixXd H;
    Eigen::VectorXd g;
    Eigen::MatrixXd C;
    Eigen::VectorXd lb, ub;

    // Symmetrizes H; eigenvalues in [-1e-9, 0) are clamped to zero, anything
    // more negative is rejected. Validates lb <= ub.
    static Qp make(Eigen::MatrixXd H, Eigen::VectorXd g, Eigen::MatrixXd C,
                   Eigen::VectorXd lb, Eigen::VectorXd ub);
};

struct QpSettings {
    double rho = 0.1;          // initial penalty
    double sigma = 1e-6;       // primal regularization
    double alpha = 1.6;        // over-relaxation
    double eps_abs = 1e-6;
    double eps_rel = 1e-6;
    double eps_pinf = 1e-6;    // infeasibility certificate tolerance
    int max_iter = 20000;
    int check_interval = 25;   // residual / rho-adaptation cadence
    bool adaptive_rho = true;
    int scaling_iters = 10;    // Ruiz equilibration passes (0 disables)
};

enum class QpStatus { Solved, MaxIter, PrimalInfeasible };

struct QpSolution {
    Eigen::VectorXd x;  // primal
    Eigen::VectorXd z;  // dual multipliers of the C rows (Hx + g + C'z = 0 at optimum)
    QpStatus status = QpStatus::MaxIter;
    int iterations = 0;
    double primal_res = 0.0, dual_res = 0.0;
    double objective = 0.0;
};

// Operator-splitting (ADMM) solver. H and C are fixed at construction so the
// KKT factorization is reused across solves with varying g, lb, ub — the MPC
// reuses one instance over the whole closed loop.
class QpSolver {
  public:
    QpSolver(const Eigen::SparseMatrix<double>& H, const Eigen::SparseMatrix<double>& C,
             const QpSettings& settings = {});

    QpSolution solve(const Eigen::VectorXd& g, const Eigen::VectorXd& lb,
                     const Eigen::VectorXd& ub);
    // Warm start from a previous iterate (x0 primal, z0 dual).
    QpSolution solve(const Eigen::VectorXd& g, const Eigen::VectorXd& lb,
                     const Eigen::VectorXd& ub, const Eigen::VectorXd& x0,
                     const Eigen::VectorXd& z0);

    int n() const { return n_; }
    int k() const { return k_; }

  private:
    void factorize();

    QpSettings st_;
    int n_ = 0, k_ = 0;
    Eigen::SparseMatrix<double> Hs_, Cs_; // scaled
    Eigen::VectorXd D_, E_;               // Ruiz scalings (x = D x_scaled, rows by E)
    double rho_;
    Eigen::VectorXd rho_vec_;             // per row (boosted on equality rows)
    bool factorized_ = false;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> kkt_;
};

QpSolution solve_qp(const Qp& qp, const QpSettings& settings = {});

// Debug dump for offline inspection.
void dump_qp_json(const Qp& qp, const std::string& path);

} // namespace ates
