#include "ates/dataset.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <vector>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ates {

namespace {

std::string sidecar_path(const std::string& path) {
    std::filesystem::path p(path);
    p.replace_extension(".json");
    return p.string();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_dataset_csv(const Dataset& ds, const std::string& path) {
    if (ds.U.rows() != ds.Y.rows() || ds.U.cols() != 2 || ds.Y.cols() != 3)
        throw std::invalid_argument("dataset: expected N x 2 inputs and N x 3 outputs");
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());

    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "t,q,T_r,T_b,T_w,T_c\n";
    for (long k = 0; k < ds.rows(); ++k) {
        f << fmt(k * ds.dt) << ',' << fmt(ds.U(k, 0)) << ',' << fmt(ds.U(k, 1)) << ','
          << fmt(ds.Y(k, 0)) << ',' << fmt(ds.Y(k, 1)) << ',' << fmt(ds.Y(k, 2)) << '\n';
    }
    if (!f) throw std::runtime_error("write failed: " + path);

    nlohmann::json side{{"dt", ds.dt},
                        {"seed", ds.seed},
                        {"split", ds.split},
                        {"config_hash", ds.config_hash},
                        {"rows", ds.rows()}};
    std::ofstream sf(sidecar_path(path));
    if (!sf) throw std::runtime_error("cannot write " + sidecar_path(path));
    sf << side.dump(2) << '\n';
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("t,q,T_r,T_b,T_w,T_c", 0) != 0)
        throw std::runtime_error("bad dataset header in " + path);

    std::vector<std::array<double, 6>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::array<double, 6> r{};
        std::stringstream ss(line);
        std::string cell;
        for (int j = 0; j < 6; ++j) {
            if (!std::getline(ss, cell, ','))
                throw std::runtime_error("short row in " + path);
            size_t pos = 0;
            r[j] = std::stod(cell, &pos);
            if (pos != cell.size()) throw std::runtime_error("bad number in " + path);
        }
        rows.push_back(r);
    }

    Dataset ds;
    ds.U.resize(long(rows.size()), 2);
    ds.Y.resize(long(rows.size()), 3);
    for (long k = 0; k < long(rows.size()); ++k) {
        ds.U(k, 0) = rows[k][1];
        ds.U(k, 1) = rows[k][2];
        ds.Y(k, 0) = rows[k][3];
        ds.Y(k, 1) = rows[k][4];
        ds.Y(k, 2) = rows[k][5];
    }

    std::ifstream sf(sidecar_path(path));
    if (sf) {
        nlohmann::json side = nlohmann::json::parse(sf);
        ds.dt = side.value("dt", 60.0);
        ds.seed = side.value("seed", std::uint64_t{0});
        ds.split = side.value("split", "");
        ds.config_hash = side.value("config_hash", "");
    } else if (rows.size() >= 2) {
        ds.dt = rows[1][0] - rows[0][0];
    }
    return ds;
}

} // namespace ates
