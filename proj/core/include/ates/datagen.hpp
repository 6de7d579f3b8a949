#pragma once

#include "ates/dataset.hpp"
#include "ates/plant.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace ates {

struct ExcitationConfig {
    int hold_min = 10;   // steps
    int hold_max = 120;  // steps (inclusive)
    // Heating-dominated levels: the campaign mirrors the heating-season duty
    // cycle, so the warm well keeps acting as a source instead of being
    // flushed with cooled return water.
    double level_lo = -25.0;  // m^3/h
    double level_hi = 100.0;
    double level_step = 25.0;
};

// Piecewise-constant multilevel pseudo-random flow signal; deterministic per seed.
std::vector<double> excitation_flow(int n_steps, std::uint64_t seed,
                                    const ExcitationConfig& cfg = {});

// Daily sinusoid plus seeded random walk, clipped to [low, high].
std::vector<double> return_temp_profile(int n_steps, std::uint64_t seed,
                                        double low = 276.15, double high = 291.15,
                                        double dt = 60.0);

struct DatagenConfig {
    int n_train = 2900;
    int n_val = 820;
    // Unrecorded settling period before the first sample: the freshly charged
    // wells relax toward their pumped equilibrium, so the recorded campaign is
    // quasi-stationary (a trending well temperature otherwise biases the
    // correlation-based identification toward a spurious near-unit root).
    int burn_in = 1500;
    // Identification campaign runs at the heating-season operating point so the
    // fitted model is valid where the controller operates.
    double tr_low = 276.15;  // K
    double tr_high = 280.15; // K
    double charge_peak = 7.5;  // K, initial ground charge above/below ambient
    double charge_width = 2.4; // m
};

// Simulates the plant under the excitation and splits contiguously.
std::pair<Dataset, Dataset> simulate_dataset(const PlantParams& params,
                                             const DatagenConfig& cfg,
                                             std::uint64_t seed);

// Replays the identification campaign and returns the plant in its end state,
// so downstream scenarios continue from the operating point the model was
// fitted at.
Plant replay_campaign(const PlantParams& params, const DatagenConfig& cfg,
                      std::uint64_t seed);

// Deterministic stream splitting so plant/excitation/profile draws do not interact.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

} // namespace ates
