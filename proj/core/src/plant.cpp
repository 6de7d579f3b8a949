#include "ates/plant.hpp"

#include <cmath>

namespace ates {

OperatingMode mode_of(double q) {
    if (q > 0.0) return OperatingMode::Heating;
    if (q < 0.0) return OperatingMode::Cooling;
    return OperatingMode::Storing;
}

Eigen::VectorXd PlantParams::cell_centers() const {
    Eigen::VectorXd rc(n_cells);
    for (int i = 0; i < n_cells; ++i) rc[i] = r0 + dr() * (i + 0.5);
    return rc;
}

Eigen::VectorXd PlantParams::cell_volumes() const {
    Eigen::VectorXd v(n_cells);
    const double d = dr();
    for (int i = 0; i < n_cells; ++i) {
        const double ri = r0 + i * d, ro = ri + d;
        v[i] = M_PI * l * (ro * ro - ri * ri);
    }
    return v;
}

double PlantParams::borehole_capacity() const { return c_w * M_PI * r0 * r0 * l; }

void PlantParams::validate() const {
    if (!(c_a > 0 && c_w > 0 && l > 0 && r0 > 0 && dt > 0 && V_b > 0))
        throw std::invalid_argument("plant params: c_a, c_w, l, r0, dt, V_b must be > 0");
    if (!(r_max > r0)) throw std::invalid_argument("plant params: r_max must exceed r0");
    if (n_cells < 2) throw std::invalid_argument("plant params: n_cells must be >= 2");
    if (lambda.size() != n_cells)
        throw std::invalid_argument("plant params: lambda must have n_cells entries");
    if ((lambda.array() <= 0.0).any())
        throw std::invalid_argument("plant params: every lambda[i] must be > 0");
    if (!(q_min < 0.0 && 0.0 < q_max))
        throw std::invalid_argument("plant params: need q_min < 0 < q_max");
}

std::pair<double, double> hx_alphas(double q, const PlantParams& p) {
    if (q == 0.0) throw HxInactive{};
    const double kA = p.hx_coeff * p.hx_area;
    const double C_a = p.c_w * std::abs(q) / 3600.0; // ATES-side capacity rate, W/K
    const double C_b = p.c_w * p.V_b;                // building-side capacity rate
    const double C_min = std::min(C_a, C_b), C_max = std::max(C_a, C_b);
    const double Cr = C_min / C_max;
    const double ntu = kA / C_min;
    const double eff = (1.0 - std::exp(-ntu * (1.0 + Cr))) / (1.0 + Cr);
    const double Q_per_dT = eff * C_min; // W/K across the exchanger
    return {Q_per_dT / C_a, Q_per_dT / C_b};
}

double hx_alpha(double q, const PlantParams& p) { return hx_alphas(q, p).first; }

std::pair<double, double> hx_outlets(double T_ates_in, double T_r, double alpha_a,
                                     double alpha_b) {
    const double T_ates_out = (1.0 - alpha_a) * T_ates_in + alpha_a * T_r;
    const double T_b = (1.0 - alpha_b) * T_r + alpha_b * T_ates_in;
    return {T_ates_out, T_b};
}

// Backward-Euler FV step. Unknowns: [T_bore, T_0 .. T_{n-1}]. Conduction uses
// harmonic-mean face conductivities; advection is first-order upwind.
Eigen::VectorXd pde_step(const Eigen::VectorXd& x, double q, double T_inject,
                         const PlantParams& p) {
    const int n = p.n_cells;
    if (x.size() != n + 1) throw std::invalid_argument("pde_step: x must have n_cells + 1 entries");
    if (!x.allFinite() || !std::isfinite(q) || (q > 0.0 && !std::isfinite(T_inject)))
        throw std::invalid_argument("pde_step: non-finite input");

    const double d = p.dr();
    const Eigen::VectorXd Ci = p.c_a * p.cell_volumes().array();
    const double C_bore = p.borehole_capacity();
    const double W = p.c_w * q / 3600.0; // signed advective coefficient, W/K

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Eigen::VectorXd b(n + 1);
    b[0] = C_bore / p.dt * x[0];
    A(0, 0) = C_bore / p.dt;
    for (int i = 0; i < n; ++i) {
        A(i + 1, i + 1) = Ci[i] / p.dt;
        b[i + 1] = Ci[i] / p.dt * x[i + 1];
    }

    // conduction: borehole <-> cell 0, then between cells, then outer face
    const double Gb = 2.0 * M_PI * p.l * p.r0 * p.lambda[0] / (d / 2.0);
    A(0, 0) += Gb; A(0, 1) -= Gb;
    A(1, 1) += Gb; A(1, 0) -= Gb;
    for (int i = 0; i + 1 < n; ++i) {
        const double lf =
            2.0 * p.lambda[i] * p.lambda[i + 1] / (p.lambda[i] + p.lambda[i + 1]);
        const double g = 2.0 * M_PI * p.l * (p.r0 + (i + 1) * d) * lf / d;
        A(i + 1, i + 1) += g; A(i + 1, i + 2) -= g;
        A(i + 2, i + 2) += g; A(i + 2, i + 1) -= g;
    }
    if (!p.insulated_outer) {
        const double Go = 2.0 * M_PI * p.l * p.r_max * p.lambda[n - 1] / (d / 2.0);
        A(n, n) += Go;
        b[n] += Go * p.T_amb;
    }

    if (q > 0.0) {
        // injection: water enters the borehole node at T_inject and flows outward
        A(0, 0) += W;
        b[0] += W * T_inject;
        A(1, 1) += W; A(1, 0) -= W;
        for (int i = 0; i + 1 < n; ++i) {
            A(i + 2, i + 2) += W;
            A(i + 2, i + 1) -= W;
        }
    } else if (q < 0.0) {
        // extraction: inward flow, upwind neighbour is the outer cell
        const double Wm = -W;
        for (int i = 0; i < n; ++i) {
            A(i + 1, i + 1) += Wm;
            if (i + 1 < n) A(i + 1, i + 2) -= Wm;
        }
        if (p.insulated_outer)
            A(n, n) -= Wm; // no advective exchange through the outer face
        else
            b[n] += Wm * p.T_amb; // far-field inflow at ambient
        A(0, 0) += Wm; A(0, 1) -= Wm; // cell 0 -> borehole -> extracted
    }

    return A.partialPivLu().solve(b);
}

Plant::Plant(const PlantParams& p, std::uint64_t seed, double charge_peak,
             double charge_width)
    : params_(p), warm_(p), cold_(p), rng_(seed) {
    std::uniform_real_distribution<double> lam(3.0, 5.0);
    warm_.lambda.resize(p.n_cells);
    cold_.lambda.resize(p.n_cells);
    for (int i = 0; i < p.n_cells; ++i) warm_.lambda[i] = lam(rng_);
    for (int i = 0; i < p.n_cells; ++i) cold_.lambda[i] = lam(rng_);
    warm_.validate();
    cold_.validate();

    const Eigen::VectorXd rc = p.cell_centers();
    state_.x_w.resize(p.n_cells + 1);
    state_.x_c.resize(p.n_cells + 1);
    for (int i = 0; i < p.n_cells; ++i) {
        const double s = (rc[i] - p.r0) / charge_width;
        const double bump = std::exp(-s * s);
        state_.x_w[i + 1] = p.T_amb + charge_peak * bump;
        state_.x_c[i + 1] = p.T_amb - charge_peak * bump;
    }
    state_.x_w[0] = state_.x_w[1];
    state_.x_c[0] = state_.x_c[1];
    state_.T_b = p.T_amb;
}

Eigen::Vector3d Plant::step(const PlantInput& in, bool noisy) {
    if (!std::isfinite(in.q) || !std::isfinite(in.T_r))
        throw std::invalid_argument("plant step: non-finite input");
    if (in.q < params_.q_min || in.q > params_.q_max)
        throw std::out_of_range("plant step: flow outside [q_min, q_max]");

    const double q = in.q;
    if (q > 0.0) { // heating: extract warm, pass HX, inject into cold
        auto [a_a, a_b] = hx_alphas(q, params_);
        auto [T_out, T_b] = hx_outlets(state_.x_w[0], in.T_r, a_a, a_b);
        state_.T_b = T_b;
        state_.x_w = pde_step(state_.x_w, -q, 0.0, warm_);
        state_.x_c = pde_step(state_.x_c, q, T_out, cold_);
    } else if (q < 0.0) { // cooling: warm and cold change positions
        auto [a_a, a_b] = hx_alphas(q, params_);
        auto [T_out, T_b] = hx_outlets(state_.x_c[0], in.T_r, a_a, a_b);
        state_.T_b = T_b;
        state_.x_c = pde_step(state_.x_c, q, 0.0, cold_);
        state_.x_w = pde_step(state_.x_w, -q, T_out, warm_);
    } else { // storing: both aquifers diffuse; no exchange, outlet equals return
        state_.T_b = in.T_r;
        state_.x_w = pde_step(state_.x_w, 0.0, 0.0, warm_);
        state_.x_c = pde_step(state_.x_c, 0.0, 0.0, cold_);
    }

    return measure(noisy);
}

Eigen::Vector3d Plant::measure(bool noisy) {
    const double ns = noisy ? params_.noise_std : 0.0;
    const double ns_tb = noisy ? params_.noise_std_tb : 0.0;
    Eigen::Vector3d y;
    y[0] = state_.T_b + ns_tb * gauss_(rng_);
    y[1] = state_.x_w[0] + ns * gauss_(rng_);
    y[2] = state_.x_c[0] + ns * gauss_(rng_);
    return y;
}

} // namespace ates
