#include "ates/predictor.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace ates {

History History::from_data(const Eigen::MatrixXd& U, const Eigen::MatrixXd& Y, long k,
                           int sigma) {
    if (k < sigma || k > U.rows())
        throw std::invalid_argument("History::from_data: need sigma rows before k");
    History h;
    for (int i = 1; i <= sigma; ++i) {
        h.u.push_back(U.row(k - i).transpose());
        h.y.push_back(Y.row(k - i).transpose());
    }
    return h;
}

void History::push(const Eigen::VectorXd& u_new, const Eigen::VectorXd& y_new) {
    u.insert(u.begin(), u_new);
    u.pop_back();
    y.insert(y.begin(), y_new);
    y.pop_back();
}

Eigen::VectorXd predict_one(const ArxParams& par, const History& h) {
    if (int(h.u.size()) != par.sigma || int(h.y.size()) != par.sigma)
        throw std::invalid_argument("predict_one: history buffers must hold sigma entries");
    Eigen::VectorXd acc = par.y_mean;
    for (int i = 0; i < par.sigma; ++i)
        acc += par.B[i] * (h.u[i] - par.u_mean) - par.A[i] * (h.y[i] - par.y_mean);
    return acc;
}

ErrorStats error_stats(const Eigen::MatrixXd& E) {
    const long n = E.rows();
    ErrorStats st;
    st.mean = E.colwise().mean();
    Eigen::MatrixXd C = E.rowwise() - st.mean.transpose();
    st.stddev = n > 1 ? Eigen::VectorXd((C.colwise().squaredNorm() / double(n - 1))
                                            .array()
                                            .sqrt()
                                            .transpose())
                      : Eigen::VectorXd::Zero(E.cols());
    st.mae = E.cwiseAbs().colwise().maxCoeff();
    return st;
}

Eigen::MatrixXd prediction_errors(const ArxParams& par, const Dataset& ds) {
    const long N = ds.rows();
    if (N <= par.sigma) throw std::invalid_argument("prediction_errors: dataset too short");
    Eigen::MatrixXd E(N - par.sigma, par.p);
    for (long k = par.sigma; k < N; ++k) {
        const History h = History::from_data(ds.U, ds.Y, k, par.sigma);
        E.row(k - par.sigma) = (predict_one(par, h) - ds.Y.row(k).transpose()).transpose();
    }
    return E;
}

ErrorStats validate_single_step(const ArxParams& par, const Dataset& ds) {
    return error_stats(prediction_errors(par, ds));
}

Eigen::MatrixXd rollout(const ArxParams& par, const History& h0,
                        const Eigen::MatrixXd& u_future) {
    History h = h0;
    Eigen::MatrixXd out(u_future.rows(), par.p);
    for (long k = 0; k < u_future.rows(); ++k) {
        const Eigen::VectorXd yhat = predict_one(par, h);
        out.row(k) = yhat.transpose();
        h.push(u_future.row(k).transpose(), yhat);
    }
    return out;
}

Eigen::MatrixXd rollout_controlled(const ArxParams& par, const History& h0,
                                   const Eigen::MatrixXd& u_future) {
    History h = h0;
    Eigen::MatrixXd out(u_future.rows(), par.p);
    for (long k = 0; k < u_future.rows(); ++k) {
        h.u.insert(h.u.begin(), u_future.row(k).transpose());
        h.u.pop_back();
        const Eigen::VectorXd yhat = predict_one(par, h);
        out.row(k) = yhat.transpose();
        h.y.insert(h.y.begin(), yhat);
        h.y.pop_back();
    }
    return out;
}

HorizonProfile horizon_error_profile(const ArxParams& par, const Dataset& ds, int N,
                                     int n_samples) {
    const long L = ds.rows();
    const long window = N + par.sigma;
    const long n_starts = L - window + 1; // admissible window start indices
    if (n_samples < 1 || n_starts < n_samples)
        throw std::invalid_argument("horizon_error_profile: insufficient data for requested windows");

    std::vector<long> starts(n_samples);
    if (window * long(n_samples) <= L) {
        for (int i = 0; i < n_samples; ++i) starts[i] = i * window;
    } else {
        const long stride = n_samples > 1 ? (n_starts - 1) / (n_samples - 1) : 0;
        for (int i = 0; i < n_samples; ++i) starts[i] = i * stride;
    }

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(N, par.p);
    Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(N, par.p);
    for (long s : starts) {
        const History h0 = History::from_data(ds.U, ds.Y, s + par.sigma, par.sigma);
        const Eigen::MatrixXd yhat =
            rollout(par, h0, ds.U.middleRows(s + par.sigma, N));
        const Eigen::MatrixXd err = yhat - ds.Y.middleRows(s + par.sigma, N);
        sum += err;
        sumsq += err.cwiseProduct(err);
    }

    HorizonProfile prof;
    prof.n_samples = n_samples;
    prof.mean = sum / double(n_samples);
    prof.stddev =
        n_samples > 1
            ? Eigen::MatrixXd(((sumsq - double(n_samples) * prof.mean.cwiseProduct(prof.mean)) /
                               double(n_samples - 1))
                                  .cwiseMax(0.0)
                                  .cwiseSqrt())
            : Eigen::MatrixXd::Zero(N, par.p);
    return prof;
}

namespace {
void open_out(std::ofstream& f, const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    f.open(path);
    if (!f) throw std::runtime_error("cannot write " + path);
}
} // namespace

void write_errors_csv(const Eigen::MatrixXd& errors, const std::string& path) {
    std::ofstream f;
    open_out(f, path);
    f << "k,err_Tb,err_Tw,err_Tc\n";
    char buf[32];
    for (long k = 0; k < errors.rows(); ++k) {
        f << k;
        for (long j = 0; j < errors.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", errors(k, j));
            f << ',' << buf;
        }
        f << '\n';
    }
}

void write_profile_csv(const HorizonProfile& prof, const std::string& path) {
    std::ofstream f;
    open_out(f, path);
    f << "step,mean_Tb,std_Tb,mean_Tw,std_Tw,mean_Tc,std_Tc\n";
    char buf[32];
    for (long k = 0; k < prof.mean.rows(); ++k) {
        f << (k + 1);
        for (long j = 0; j < prof.mean.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", prof.mean(k, j));
            f << ',' << buf;
            std::snprintf(buf, sizeof buf, "%.17g", prof.stddev(k, j));
            f << ',' << buf;
        }
        f << '\n';
    }
}

} // namespace ates
