#include "ates/sysid.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

namespace ates {

namespace {

nlohmann::json mat_to_json(const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (long i = 0; i < M.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (long j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

Eigen::MatrixXd mat_from_json(const nlohmann::json& j) {
    const long rows = long(j.size());
    const long cols = rows ? long(j.at(0).size()) : 0;
    Eigen::MatrixXd M(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long jj = 0; jj < cols; ++jj) M(i, jj) = j.at(i).at(jj).get<double>();
    return M;
}

} // namespace

void save_arx_json(const ArxParams& par, const std::string& path) {
    nlohmann::json j;
    j["sigma"] = par.sigma;
    j["p"] = par.p;
    j["m"] = par.m;
    j["A"] = nlohmann::json::array();
    j["B"] = nlohmann::json::array();
    for (const auto& Ai : par.A) j["A"].push_back(mat_to_json(Ai));
    for (const auto& Bi : par.B) j["B"].push_back(mat_to_json(Bi));
    j["u_mean"] = std::vector<double>(par.u_mean.data(), par.u_mean.data() + par.u_mean.size());
    j["y_mean"] = std::vector<double>(par.y_mean.data(), par.y_mean.data() + par.y_mean.size());

    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << j.dump(2) << '\n';
}

ArxParams load_arx_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    nlohmann::json j = nlohmann::json::parse(f);
    ArxParams par;
    par.sigma = j.at("sigma").get<int>();
    par.p = j.at("p").get<int>();
    par.m = j.at("m").get<int>();
    for (const auto& a : j.at("A")) par.A.push_back(mat_from_json(a));
    for (const auto& b : j.at("B")) par.B.push_back(mat_from_json(b));
    const auto um = j.at("u_mean").get<std::vector<double>>();
    const auto ym = j.at("y_mean").get<std::vector<double>>();
    par.u_mean = Eigen::Map<const Eigen::VectorXd>(um.data(), long(um.size()));
    par.y_mean = Eigen::Map<const Eigen::VectorXd>(ym.data(), long(ym.size()));
    if (int(par.A.size()) != par.sigma || int(par.B.size()) != par.sigma)
        throw std::runtime_error("arx json: block count does not match sigma");
    return par;
}

Eigen::MatrixXd pack_arx(const ArxParams& par) {
    const int s = par.sigma, m = par.m, p = par.p;
    Eigen::MatrixXd Z(s * (m + p), p);
    for (int i = 0; i < s; ++i) Z.middleRows(i * m, m) = par.B[i].transpose();
    for (int i = 0; i < s; ++i) Z.middleRows(s * m + i * p, p) = -par.A[i].transpose();
    return Z;
}

ArxParams unpack_arx(const Eigen::MatrixXd& Z, int sigma, int m, int p,
                     const Eigen::VectorXd& u_mean, const Eigen::VectorXd& y_mean) {
    if (Z.rows() != sigma * (m + p) || Z.cols() != p)
        throw std::invalid_argument("unpack_arx: Z must be sigma(m+p) x p");
    ArxParams par;
    par.sigma = sigma;
    par.m = m;
    par.p = p;
    par.u_mean = u_mean;
    par.y_mean = y_mean;
    for (int i = 0; i < sigma; ++i)
        par.B.push_back(Z.middleRows(i * m, m).transpose());
    for (int i = 0; i < sigma; ++i)
        par.A.push_back(-Z.middleRows(sigma * m + i * p, p).transpose());
    return par;
}

double xcorr(const Eigen::VectorXd& f, const Eigen::VectorXd& g, int kappa) {
    const long N = f.size();
    if (g.size() != N) throw std::invalid_argument("xcorr: sequences must have equal length");
    if (std::abs(kappa) >= N) throw std::invalid_argument("xcorr: |kappa| must be < N");
    if (kappa < 0) return xcorr(g, f, -kappa);
    return f.head(N - kappa).dot(g.tail(N - kappa)) / double(N + 1);
}

CorrelationSet build_correlations(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y,
                                  int P) {
    const long N = U.rows();
    if (P >= N) throw std::invalid_argument("build_correlations: P must be < N");
    const int m = int(U.cols()), p = int(Y.cols());
    CorrelationSet cs;
    cs.P = P;
    cs.N = N;
    for (int k = -P; k <= P; ++k) {
        Eigen::MatrixXd tuu(m, m), tuy(m, p);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) tuu(i, j) = xcorr(U.col(i), U.col(j), k);
            for (int j = 0; j < p; ++j) tuy(i, j) = xcorr(U.col(i), Y.col(j), k);
        }
        cs.theta_uu.emplace(k, std::move(tuu));
        cs.theta_uy.emplace(k, std::move(tuy));
    }
    return cs;
}

CorrDecayReport check_corr_decay(const Eigen::MatrixXd& Uc, const Eigen::MatrixXd& Yc,
                                 const CorrelationSet& cs, int margin_shifts,
                                 double tol) {
    CorrDecayReport rep;
    rep.tol = tol;
    for (int k = cs.P + 1; k <= cs.P + margin_shifts; ++k) {
        for (long i = 0; i < Uc.cols(); ++i) {
            for (long j = 0; j < Uc.cols(); ++j)
                rep.max_abs = std::max(rep.max_abs, std::abs(xcorr(Uc.col(i), Uc.col(j), k)));
            for (long j = 0; j < Yc.cols(); ++j)
                rep.max_abs = std::max(rep.max_abs, std::abs(xcorr(Uc.col(i), Yc.col(j), k)));
        }
    }
    rep.pass = rep.max_abs <= tol;
    return rep;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_corls_system(const CorrelationSet& cs,
                                                               int sigma) {
    if (sigma > cs.P) throw std::invalid_argument("build_corls_system: sigma must be <= P");
    const int m = int(cs.theta_uu.at(0).rows());
    const int p = int(cs.theta_uy.at(0).cols());
    const int n_blocks = 2 * cs.P - sigma + 1;
    Eigen::MatrixXd M(n_blocks * m, sigma * (m + p));
    Eigen::MatrixXd V(n_blocks * m, p);
    int row = 0;
    for (int k = -cs.P + sigma; k <= cs.P; ++k, row += m) {
        for (int i = 1; i <= sigma; ++i) {
            M.block(row, (i - 1) * m, m, m) = cs.theta_uu.at(k - i);
            M.block(row, sigma * m + (i - 1) * p, m, p) = cs.theta_uy.at(k - i);
        }
        V.middleRows(row, m) = cs.theta_uy.at(k);
    }
    return {M, V};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_ls_system(const Eigen::MatrixXd& Uc,
                                                            const Eigen::MatrixXd& Yc,
                                                            int sigma) {
    const long N = Uc.rows();
    if (N <= sigma) throw std::invalid_argument("build_ls_system: need N > sigma");
    const int m = int(Uc.cols()), p = int(Yc.cols());
    Eigen::MatrixXd M(N - sigma, sigma * (m + p));
    Eigen::MatrixXd V(N - sigma, p);
    for (long k = sigma; k < N; ++k) {
        const long row = k - sigma;
        for (int i = 1; i <= sigma; ++i) {
            M.block(row, (i - 1) * m, 1, m) = Uc.row(k - i);
            M.block(row, sigma * m + (i - 1) * p, 1, p) = Yc.row(k - i);
        }
        V.row(row) = Yc.row(k);
    }
    return {M, V};
}

Eigen::MatrixXd solve_frobenius_ls(const Eigen::MatrixXd& M, const Eigen::MatrixXd& V) {
    if (M.rows() < M.cols())
        throw std::invalid_argument("solve_frobenius_ls: system must not be underdetermined");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv(0) > 0.0) || sv(sv.size() - 1) < 1e-10 * sv(0))
        throw InsufficientExcitation{};
    return M.householderQr().solve(V);
}

ArxParams identify(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y, int sigma,
                   IdMethod method, int P) {
    const Eigen::VectorXd um = U.colwise().mean();
    const Eigen::VectorXd ym = Y.colwise().mean();
    const Eigen::MatrixXd Uc = U.rowwise() - um.transpose();
    const Eigen::MatrixXd Yc = Y.rowwise() - ym.transpose();

    Eigen::MatrixXd M, V;
    if (method == IdMethod::CORLS) {
        if (P <= 0) throw std::invalid_argument("identify: CORLS requires P > 0");
        const CorrelationSet cs = build_correlations(Uc, Yc, P);
        std::tie(M, V) = build_corls_system(cs, sigma);
    } else {
        std::tie(M, V) = build_ls_system(Uc, Yc, sigma);
    }
    const Eigen::MatrixXd Z = solve_frobenius_ls(M, V);
    return unpack_arx(Z, sigma, int(U.cols()), int(Y.cols()), um, ym);
}

ArxParams identify(const Dataset& ds, int sigma, IdMethod method, int P) {
    return identify(ds.U, ds.Y, sigma, method, P);
}

} // namespace ates
