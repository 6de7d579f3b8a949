#include "ates/qp.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace ates {

Qp Qp::make(Eigen::MatrixXd H, Eigen::VectorXd g, Eigen::MatrixXd C, Eigen::VectorXd lb,
            Eigen::VectorXd ub) {
    if (H.rows() != H.cols() || g.size() != H.rows() || C.cols() != H.rows() ||
        lb.size() != C.rows() || ub.size() != C.rows())
        throw std::invalid_argument("Qp::make: inconsistent dimensions");
    if (((ub - lb).array() < 0.0).any())
        throw std::invalid_argument("Qp::make: lb must be <= ub elementwise");

    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < -1e-9) throw std::invalid_argument("Qp::make: H is not positive semidefinite");
    if (lmin < 0.0) {
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
        H = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    }
    return Qp{std::move(H), std::move(g), std::move(C), std::move(lb), std::move(ub)};
}

QpSolver::QpSolver(const Eigen::SparseMatrix<double>& H,
                   const Eigen::SparseMatrix<double>& C, const QpSettings& settings)
    : st_(settings), n_(int(H.rows())), k_(int(C.rows())), Hs_(H), Cs_(C),
      rho_(settings.rho) {
    if (H.cols() != n_ || C.cols() != n_)
        throw std::invalid_argument("QpSolver: inconsistent dimensions");

    // Ruiz equilibration on [H C'; C 0]
    D_ = Eigen::VectorXd::Ones(n_);
    E_ = Eigen::VectorXd::Ones(k_);
    for (int pass = 0; pass < st_.scaling_iters; ++pass) {
        Eigen::VectorXd cn = Eigen::VectorXd::Zero(n_); // inf-norm of column j of [H; C]
        Eigen::VectorXd rn = Eigen::VectorXd::Zero(k_); // inf-norm of row i of C
        for (int j = 0; j < Hs_.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(Hs_, j); it; ++it)
                cn[j] = std::max(cn[j], std::abs(it.value()));
        for (int j = 0; j < Cs_.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(Cs_, j); it; ++it) {
                cn[j] = std::max(cn[j], std::abs(it.value()));
                rn[it.row()] = std::max(rn[it.row()], std::abs(it.value()));
            }
        Eigen::VectorXd dj =
            cn.array().max(1e-12).sqrt().inverse().min(1e4).max(1e-4).matrix();
        Eigen::VectorXd ei =
            rn.array().max(1e-12).sqrt().inverse().min(1e4).max(1e-4).matrix();
        Hs_ = dj.asDiagonal() * Hs_ * dj.asDiagonal();
        Cs_ = ei.asDiagonal() * Cs_ * dj.asDiagonal();
        D_ = D_.cwiseProduct(dj);
        E_ = E_.cwiseProduct(ei);
    }
    rho_vec_ = Eigen::VectorXd::Constant(k_, rho_);
}

void QpSolver::factorize() {
    using T = Eigen::Triplet<double>;
    std::vector<T> trips;
    trips.reserve(size_t(Hs_.nonZeros() + Cs_.nonZeros() + n_ + k_));
    for (int j = 0; j < Hs_.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(Hs_, j); it; ++it)
            trips.emplace_back(int(it.row()), int(it.col()), it.value());
    for (int i = 0; i < n_; ++i) trips.emplace_back(i, i, st_.sigma);
    for (int j = 0; j < Cs_.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(Cs_, j); it; ++it) {
            trips.emplace_back(n_ + int(it.row()), int(it.col()), it.value());
            trips.emplace_back(int(it.col()), n_ + int(it.row()), it.value());
        }
    for (int i = 0; i < k_; ++i) trips.emplace_back(n_ + i, n_ + i, -1.0 / rho_vec_[i]);

    Eigen::SparseMatrix<double> kkt(n_ + k_, n_ + k_);
    kkt.setFromTriplets(trips.begin(), trips.end());
    kkt_.compute(kkt);
    if (kkt_.info() != Eigen::Success)
        throw std::runtime_error("QpSolver: KKT factorization failed");
    factorized_ = true;
}

QpSolution QpSolver::solve(const Eigen::VectorXd& g, const Eigen::VectorXd& lb,
                           const Eigen::VectorXd& ub) {
    return solve(g, lb, ub, Eigen::VectorXd::Zero(n_), Eigen::VectorXd::Zero(k_));
}

QpSolution QpSolver::solve(const Eigen::VectorXd& g, const Eigen::VectorXd& lb,
                           const Eigen::VectorXd& ub, const Eigen::VectorXd& x0,
                           const Eigen::VectorXd& z0) {
    if (g.size() != n_ || lb.size() != k_ || ub.size() != k_ || x0.size() != n_ ||
        z0.size() != k_)
        throw std::invalid_argument("QpSolver::solve: inconsistent dimensions");
    if (((ub - lb).array() < 0.0).any())
        throw std::invalid_argument("QpSolver::solve: lb must be <= ub elementwise");

    // per-row penalties: boost equality rows
    bool rho_changed = false;
    for (int i = 0; i < k_; ++i) {
        const double want = (lb[i] == ub[i]) ? 1e3 * rho_ : rho_;
        if (rho_vec_[i] != want) {
            rho_vec_[i] = want;
            rho_changed = true;
        }
    }
    if (rho_changed || !factorized_) factorize();

    const Eigen::VectorXd gs = D_.cwiseProduct(g);
    const Eigen::VectorXd lbs = E_.cwiseProduct(lb);
    const Eigen::VectorXd ubs = E_.cwiseProduct(ub);

    Eigen::VectorXd x = D_.cwiseInverse().cwiseProduct(x0);
    Eigen::VectorXd y = E_.cwiseInverse().cwiseProduct(z0); // scaled dual
    Eigen::VectorXd z = (Cs_ * x).cwiseMax(lbs).cwiseMin(ubs);

    QpSolution sol;
    Eigen::VectorXd rhs(n_ + k_), kktsol(n_ + k_);
    Eigen::VectorXd y_prev_check = y;
    int it = 0;
    for (it = 1; it <= st_.max_iter; ++it) {
        rhs.head(n_) = st_.sigma * x - gs;
        rhs.tail(k_) = z - y.cwiseQuotient(rho_vec_);
        kktsol = kkt_.solve(rhs);
        const auto xt = kktsol.head(n_);
        const auto nu = kktsol.tail(k_);
        const Eigen::VectorXd zt = z + (nu - y).cwiseQuotient(rho_vec_);

        x = st_.alpha * xt + (1.0 - st_.alpha) * x;
        const Eigen::VectorXd z_relax = st_.alpha * zt + (1.0 - st_.alpha) * z;
        const Eigen::VectorXd z_new =
            (z_relax + y.cwiseQuotient(rho_vec_)).cwiseMax(lbs).cwiseMin(ubs);
        y += rho_vec_.cwiseProduct(z_relax - z_new);
        z = z_new;

        if (it % st_.check_interval != 0 && it != st_.max_iter) continue;

        // unscaled residuals
        const Eigen::VectorXd Cx_u = E_.cwiseInverse().cwiseProduct(Cs_ * x);
        const Eigen::VectorXd z_u = E_.cwiseInverse().cwiseProduct(z);
        const Eigen::VectorXd Hx_u = D_.cwiseInverse().cwiseProduct(Hs_ * x);
        const Eigen::VectorXd Cty_u =
            D_.cwiseInverse().cwiseProduct(Cs_.transpose() * y);
        const double rp = (Cx_u - z_u).lpNorm<Eigen::Infinity>();
        const double rd = (Hx_u + g + Cty_u).lpNorm<Eigen::Infinity>();
        const double sp = std::max(Cx_u.lpNorm<Eigen::Infinity>(),
                                   z_u.lpNorm<Eigen::Infinity>());
        const double sd = std::max({Hx_u.lpNorm<Eigen::Infinity>(),
                                    Cty_u.lpNorm<Eigen::Infinity>(),
                                    g.lpNorm<Eigen::Infinity>()});
        const double eps_p = st_.eps_abs + st_.eps_rel * sp;
        const double eps_d = st_.eps_abs + st_.eps_rel * sd;
        sol.primal_res = rp;
        sol.dual_res = rd;
        if (rp <= eps_p && rd <= eps_d) {
            sol.status = QpStatus::Solved;
            break;
        }

        // primal infeasibility certificate from the dual update direction
        const Eigen::VectorXd dy_u = E_.cwiseProduct(y - y_prev_check);
        const double dy_norm = dy_u.lpNorm<Eigen::Infinity>();
        if (dy_norm > 1e-10) {
            const Eigen::VectorXd Ctdy =
                D_.cwiseInverse().cwiseProduct(Cs_.transpose() *
                                               E_.cwiseInverse().cwiseProduct(dy_u));
            double support = 0.0;
            for (int i = 0; i < k_; ++i)
                support += dy_u[i] > 0.0 ? ub[i] * dy_u[i] : lb[i] * dy_u[i];
            if (Ctdy.lpNorm<Eigen::Infinity>() <= st_.eps_pinf * dy_norm &&
                support <= -st_.eps_pinf * dy_norm) {
                sol.status = QpStatus::PrimalInfeasible;
                break;
            }
        }
        y_prev_check = y;

        if (st_.adaptive_rho && it != st_.max_iter) {
            const double num = rp / std::max(sp, 1e-12);
            const double den = rd / std::max(sd, 1e-12);
            const double ratio = std::sqrt(num / std::max(den, 1e-12));
            if (ratio > 5.0 || ratio < 0.2) {
                rho_ = std::clamp(rho_ * ratio, 1e-6, 1e6);
                for (int i = 0; i < k_; ++i)
                    rho_vec_[i] = (lb[i] == ub[i]) ? 1e3 * rho_ : rho_;
                factorize();
            }
        }
    }

    sol.iterations = std::min(it, st_.max_iter);
    sol.x = D_.cwiseProduct(x);
    sol.z = E_.cwiseProduct(y);
    sol.objective = 0.5 * sol.x.dot(D_.cwiseInverse().cwiseProduct(Hs_ * x)) +
                    g.dot(sol.x);
    return sol;
}

QpSolution solve_qp(const Qp& qp, const QpSettings& settings) {
    QpSolver solver(qp.H.sparseView(), qp.C.sparseView(), settings);
    return solver.solve(qp.g, qp.lb, qp.ub);
}

void dump_qp_json(const Qp& qp, const std::string& path) {
    auto mat = [](const Eigen::MatrixXd& M) {
        nlohmann::json rows = nlohmann::json::array();
        for (long i = 0; i < M.rows(); ++i) {
            nlohmann::json r = nlohmann::json::array();
            for (long j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
            rows.push_back(std::move(r));
        }
        return rows;
    };
    auto vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    nlohmann::json j{{"H", mat(qp.H)}, {"g", vec(qp.g)},   {"C", mat(qp.C)},
                     {"lb", vec(qp.lb)}, {"ub", vec(qp.ub)}};
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << j.dump() << '\n';
}

} // namespace ates
