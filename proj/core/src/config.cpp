#include "ates/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ates {

namespace {

template <typename T>
void opt(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void opt_vec3(const nlohmann::json& j, const char* key, Eigen::Vector3d& out) {
    if (!j.contains(key)) return;
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError(std::string("config: ") + key + " needs 3 entries");
    out = Eigen::Vector3d(v[0], v[1], v[2]);
}

} // namespace

nlohmann::json WorkbenchConfig::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["plant"] = {{"c_a", plant.c_a},       {"c_w", plant.c_w},
                  {"l", plant.l},           {"r0", plant.r0},
                  {"n_cells", plant.n_cells}, {"r_max", plant.r_max},
                  {"dt", plant.dt},         {"T_amb", plant.T_amb},
                  {"hx_coeff", plant.hx_coeff}, {"hx_area", plant.hx_area},
                  {"V_b", plant.V_b},       {"noise_std", plant.noise_std},
                  {"noise_std_tb", plant.noise_std_tb},
                  {"q_min", plant.q_min},   {"q_max", plant.q_max}};
    j["datagen"] = {{"n_train", datagen.n_train},   {"n_val", datagen.n_val},
                    {"burn_in", datagen.burn_in},
                    {"tr_low", datagen.tr_low},     {"tr_high", datagen.tr_high},
                    {"charge_peak", datagen.charge_peak},
                    {"charge_width", datagen.charge_width}};
    j["identify"] = {{"sigma", sigma},
                     {"P", P},
                     {"method", method == IdMethod::CORLS ? "CORLS" : "LS"}};
    j["validate"] = {{"horizon", val_horizon}, {"n_samples", val_samples}};
    j["mpc"] = {{"N", ocp.N},
                {"y_upper", {ocp.y_upper[0], ocp.y_upper[1], ocp.y_upper[2]}},
                {"y_lower", {ocp.y_lower[0], ocp.y_lower[1], ocp.y_lower[2]}},
                {"q_min", ocp.q_min},
                {"q_max", ocp.q_max},
                {"Q_weight", ocp.Q_weight},
                {"R_weight", ocp.R_weight},
                {"w_weight", ocp.w_weight},
                {"margin", margin},
                {"duration", mpc_duration},
                {"demand_profile", demand_profile},
                {"tr_low", mpc_tr_low},
                {"tr_high", mpc_tr_high}};
    j["jobs"] = jobs;
    return j;
}

WorkbenchConfig WorkbenchConfig::from_json(const nlohmann::json& j) {
    WorkbenchConfig c;
    try {
        opt(j, "seed", c.seed);
        opt(j, "output_dir", c.output_dir);
        opt(j, "jobs", c.jobs);
        if (j.contains("plant")) {
            const auto& p = j.at("plant");
            opt(p, "c_a", c.plant.c_a);
            opt(p, "c_w", c.plant.c_w);
            opt(p, "l", c.plant.l);
            opt(p, "r0", c.plant.r0);
            opt(p, "n_cells", c.plant.n_cells);
            opt(p, "r_max", c.plant.r_max);
            opt(p, "dt", c.plant.dt);
            opt(p, "T_amb", c.plant.T_amb);
            opt(p, "hx_coeff", c.plant.hx_coeff);
            opt(p, "hx_area", c.plant.hx_area);
            opt(p, "V_b", c.plant.V_b);
            opt(p, "noise_std", c.plant.noise_std);
            opt(p, "noise_std_tb", c.plant.noise_std_tb);
            opt(p, "q_min", c.plant.q_min);
            opt(p, "q_max", c.plant.q_max);
        }
        if (j.contains("datagen")) {
            const auto& d = j.at("datagen");
            opt(d, "n_train", c.datagen.n_train);
            opt(d, "n_val", c.datagen.n_val);
            opt(d, "burn_in", c.datagen.burn_in);
            opt(d, "tr_low", c.datagen.tr_low);
            opt(d, "tr_high", c.datagen.tr_high);
            opt(d, "charge_peak", c.datagen.charge_peak);
            opt(d, "charge_width", c.datagen.charge_width);
        }
        if (j.contains("identify")) {
            const auto& i = j.at("identify");
            opt(i, "sigma", c.sigma);
            opt(i, "P", c.P);
            std::string m = c.method == IdMethod::CORLS ? "CORLS" : "LS";
            opt(i, "method", m);
            if (m == "CORLS") c.method = IdMethod::CORLS;
            else if (m == "LS") c.method = IdMethod::LS;
            else throw ConfigError("config: identify.method must be LS or CORLS");
        }
        if (j.contains("validate")) {
            const auto& v = j.at("validate");
            opt(v, "horizon", c.val_horizon);
            opt(v, "n_samples", c.val_samples);
        }
        if (j.contains("mpc")) {
            const auto& m = j.at("mpc");
            opt(m, "N", c.ocp.N);
            opt_vec3(m, "y_upper", c.ocp.y_upper);
            opt_vec3(m, "y_lower", c.ocp.y_lower);
            opt(m, "q_min", c.ocp.q_min);
            opt(m, "q_max", c.ocp.q_max);
            opt(m, "Q_weight", c.ocp.Q_weight);
            opt(m, "R_weight", c.ocp.R_weight);
            opt(m, "w_weight", c.ocp.w_weight);
            opt(m, "margin", c.margin);
            opt(m, "duration", c.mpc_duration);
            opt(m, "demand_profile", c.demand_profile);
            opt(m, "tr_low", c.mpc_tr_low);
            opt(m, "tr_high", c.mpc_tr_high);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

void WorkbenchConfig::validate() const {
    if (sigma < 1) throw ConfigError("config: sigma must be >= 1");
    if (sigma > P) throw ConfigError("config: require sigma <= P");
    if (plant.dt <= 0) throw ConfigError("config: dt must be > 0");
    if (datagen.n_train < 1 || datagen.n_val < 1)
        throw ConfigError("config: dataset sizes must be >= 1");
    if (val_horizon < 1 || val_samples < 1)
        throw ConfigError("config: validation settings must be >= 1");
    if (mpc_duration < 1) throw ConfigError("config: mpc duration must be >= 1");
    if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
    try {
        ocp.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::string WorkbenchConfig::hash() const {
    const std::string s = to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

WorkbenchConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return WorkbenchConfig::from_json(j);
}

void save_config(const WorkbenchConfig& cfg, const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << cfg.to_json().dump(2) << '\n';
}

std::vector<double> builtin_demand_profile(int n_steps, double dt) {
    std::vector<double> out(n_steps);
    for (int k = 0; k < n_steps; ++k) {
        const double hour = std::fmod(k * dt / 3600.0, 24.0);
        const double morning = std::exp(-std::pow((hour - 7.0) / 2.0, 2));
        const double evening = std::exp(-std::pow((hour - 19.0) / 2.5, 2));
        out[k] = 150e3 + 130e3 * morning + 120e3 * evening;
    }
    return out;
}

std::vector<double> load_demand_profile(const std::string& path, int n_steps,
                                        double dt) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read demand profile " + path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("t,", 0) != 0)
        throw DataError("bad demand profile header in " + path);
    std::vector<double> t, w;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
            throw DataError("short row in demand profile " + path);
        try {
            t.push_back(std::stod(a));
            w.push_back(std::stod(b));
        } catch (const std::exception&) {
            throw DataError("bad number in demand profile " + path);
        }
    }
    if (t.empty()) throw DataError("empty demand profile " + path);

    // sample-and-hold onto the control grid
    std::vector<double> out(n_steps);
    size_t i = 0;
    for (int k = 0; k < n_steps; ++k) {
        const double tk = k * dt;
        while (i + 1 < t.size() && t[i + 1] <= tk) ++i;
        out[k] = w[i];
    }
    return out;
}

} // namespace ates
