#include "ates/datagen.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ates {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 finalizer over (seed ^ salted constant)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<double> excitation_flow(int n_steps, std::uint64_t seed,
                                    const ExcitationConfig& cfg) {
    if (n_steps < 1) throw std::invalid_argument("excitation_flow: n_steps must be >= 1");
    const int n_levels = int(std::round((cfg.level_hi - cfg.level_lo) / cfg.level_step)) + 1;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> hold(cfg.hold_min, cfg.hold_max);
    std::uniform_int_distribution<int> level(0, n_levels - 1);

    std::vector<double> out(n_steps);
    int i = 0;
    while (i < n_steps) {
        const int h = hold(rng);
        const double v = cfg.level_lo + cfg.level_step * level(rng);
        for (int j = 0; j < h && i < n_steps; ++j) out[i++] = v;
    }
    return out;
}

std::vector<double> return_temp_profile(int n_steps, std::uint64_t seed, double low,
                                        double high, double dt) {
    if (low > high) throw std::invalid_argument("return_temp_profile: low > high");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 2.0 * M_PI);
    std::normal_distribution<double> gauss(0.0, 0.05);
    std::normal_distribution<double> jitter(0.0, 0.3); // step-to-step demand noise

    const double mid = 0.5 * (low + high);
    const double amp = 0.3 * (high - low);
    const double phase = unif(rng);
    std::vector<double> out(n_steps);
    double walk = 0.0;
    for (int k = 0; k < n_steps; ++k) {
        walk += gauss(rng);
        const double s = mid + amp * std::sin(2.0 * M_PI * k * dt / 86400.0 + phase) +
                         walk + jitter(rng);
        out[k] = std::clamp(s, low, high);
    }
    return out;
}

std::pair<Dataset, Dataset> simulate_dataset(const PlantParams& params,
                                             const DatagenConfig& cfg,
                                             std::uint64_t seed) {
    const int n = cfg.n_train + cfg.n_val;
    const int total = cfg.burn_in + n;
    Plant plant(params, derive_seed(seed, 0), cfg.charge_peak, cfg.charge_width);
    const auto q = excitation_flow(total, derive_seed(seed, 1));
    const auto tr = return_temp_profile(total, derive_seed(seed, 2), cfg.tr_low,
                                        cfg.tr_high, params.dt);

    for (int k = 0; k < cfg.burn_in; ++k) plant.step({q[k], tr[k]}, false);

    // Row k records the state measurement y(t_k) and the input u(t_k) applied
    // over [t_k, t_{k+1}); the input's effect shows up in row k+1.
    Eigen::MatrixXd U(n, 2), Y(n, 3);
    for (int k = 0; k < n; ++k) {
        U(k, 0) = q[cfg.burn_in + k];
        U(k, 1) = tr[cfg.burn_in + k];
        Y.row(k) = plant.measure().transpose();
        plant.step({q[cfg.burn_in + k], tr[cfg.burn_in + k]}, false);
    }

    Dataset train{params.dt, U.topRows(cfg.n_train), Y.topRows(cfg.n_train), seed,
                  "train", ""};
    Dataset val{params.dt, U.bottomRows(cfg.n_val), Y.bottomRows(cfg.n_val), seed,
                "validation", ""};
    return {train, val};
}

Plant replay_campaign(const PlantParams& params, const DatagenConfig& cfg,
                      std::uint64_t seed) {
    const int total = cfg.burn_in + cfg.n_train + cfg.n_val;
    Plant plant(params, derive_seed(seed, 0), cfg.charge_peak, cfg.charge_width);
    const auto q = excitation_flow(total, derive_seed(seed, 1));
    const auto tr = return_temp_profile(total, derive_seed(seed, 2), cfg.tr_low,
                                        cfg.tr_high, params.dt);
    for (int k = 0; k < total; ++k) plant.step({q[k], tr[k]}, false);
    return plant;
}

} // namespace ates
