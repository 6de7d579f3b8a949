#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>

namespace ates {

enum class OperatingMode { Heating, Storing, Cooling };

// q > 0: heating, q = 0: storing, q < 0: cooling
OperatingMode mode_of(double q);

struct HxInactive : std::domain_error {
    HxInactive() : std::domain_error("HX inactive: q = 0 (storing mode)") {}
};

struct PlantParams {
    double c_a = 4.4625e6;   // aquifer volumetric heat capacity, J/(m^3 K)
    double c_w = 4.2e6;      // water volumetric heat capacity, J/(m^3 K)
    Eigen::VectorXd lambda;  // per-cell conduction coefficient, W/(m K); size n_cells
    double l = 38.0;         // borehole filter length, m
    double r0 = 0.4;         // borehole radius, m
    int n_cells = 15;
    double r_max = 4.0;      // outer domain radius, m
    double dt = 60.0;        // s
    double T_amb = 284.85;   // K
    double hx_coeff = 0.1e6; // HX heat-transfer coefficient, W/(m^2 K)
    double hx_area = 10.0;   // HX area, m^2
    double V_b = 0.1;        // building-side HX flow, m^3/s
    double noise_std = 0.3;    // ground-temperature measurement noise, K
    double noise_std_tb = 0.1; // HX outlet sensor noise, K
    double q_min = -100.0;   // m^3/h
    double q_max = 100.0;    // m^3/h
    bool insulated_outer = false; // test configuration: no exchange through r_max

    // grid helpers (uniform radial grid r0..r_max)
    double dr() const { return (r_max - r0) / n_cells; }
    Eigen::VectorXd cell_centers() const;
    Eigen::VectorXd cell_volumes() const;   // m^3, per annular cell
    double borehole_capacity() const;       // J/K of the well-mixed borehole column

    void validate() const; // throws std::invalid_argument on violated invariants
};

struct PlantState {
    double T_b = 0.0;     // HX building-side outlet temperature, K
    Eigen::VectorXd x_w;  // warm aquifer: [borehole node, cell 0 .. n_cells-1], K
    Eigen::VectorXd x_c;  // cold aquifer, same layout

    int dim() const { return 1 + int(x_w.size()) + int(x_c.size()); }
};

struct PlantInput {
    double q = 0.0;   // signed groundwater flow, m^3/h (positive = heating)
    double T_r = 0.0; // building return temperature, K
};

// Cocurrent-flow effectiveness. Returns (alpha_a, alpha_b): temperature change
// coefficients on the ATES side and the building side. Throws HxInactive at q = 0.
std::pair<double, double> hx_alphas(double q, const PlantParams& p);
double hx_alpha(double q, const PlantParams& p); // alpha_a only

// T_ates_out = (1-alpha_a) T_ates_in + alpha_a T_r; T_b mirrored with alpha_b.
std::pair<double, double> hx_outlets(double T_ates_in, double T_r, double alpha_a,
                                     double alpha_b);

// One backward-Euler step of the radial advection-diffusion equation for one
// aquifer column. x = [borehole node, cells...] (n_cells + 1 entries); q is the
// flow through this aquifer: q > 0 injects at T_inject, q < 0 extracts, q = 0
// pure conduction. lambda per cell from params.
Eigen::VectorXd pde_step(const Eigen::VectorXd& x, double q, double T_inject,
                         const PlantParams& p);

class Plant {
  public:
    // Draws per-cell lambda ~ U[3,5] for each aquifer and pre-charges the ground:
    // warm aquifer at T_amb + charge_peak * gaussian bump at r0, cold mirrored.
    Plant(const PlantParams& p, std::uint64_t seed, double charge_peak = 5.0,
          double charge_width = 1.2);

    // Advances one step; input at t_k produces the state at t_{k+1}. Returns
    // the measurement of the new state.
    Eigen::Vector3d step(const PlantInput& in, bool noisy = true);

    // y = (T_b, T_w(r0), T_c(r0)) of the current state; measurement noise
    // noise_std on the ground channels, noise_std_tb on the HX outlet.
    Eigen::Vector3d measure(bool noisy = true);

    const PlantState& state() const { return state_; }
    void set_state(const PlantState& s) { state_ = s; }
    const PlantParams& params() const { return params_; }
    const PlantParams& warm_params() const { return warm_; }
    const PlantParams& cold_params() const { return cold_; }

  private:
    PlantParams params_; // lambda unset; per-aquifer copies below carry the draws
    PlantParams warm_, cold_;
    PlantState state_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

} // namespace ates
