#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace ates {

// Time-indexed input/output records: U columns (q [m^3/h], T_r [K]),
// Y columns (T_b, T_w(r0), T_c(r0)) [K].
struct Dataset {
    double dt = 60.0;
    Eigen::MatrixXd U; // N x 2
    Eigen::MatrixXd Y; // N x 3
    std::uint64_t seed = 0;
    std::string split;       // "train" | "validation"
    std::string config_hash; // hex digest of the generating config

    long rows() const { return U.rows(); }
};

// CSV with header t,q,T_r,T_b,T_w,T_c plus a JSON sidecar (same stem, .json
// extension) carrying dt, seed, split and config hash.
void write_dataset_csv(const Dataset& ds, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

} // namespace ates
