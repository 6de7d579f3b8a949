// ates-workbench: config-driven runner for the simulate -> identify ->
// validate -> mpc pipeline.

#include "ates/config.hpp"
#include "ates/datagen.hpp"
#include "ates/mpc.hpp"
#include "ates/predictor.hpp"
#include "ates/sysid.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

using namespace ates;
namespace fs = std::filesystem;

constexpr int kExitOk = 0, kExitConfig = 2, kExitData = 3, kExitNumeric = 4;

Dataset read_dataset_checked(const std::string& path) {
    try {
        return read_dataset_csv(path);
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
}

ArxParams load_params_checked(const std::string& path) {
    try {
        return load_arx_json(path);
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
}

std::string params_path(const WorkbenchConfig& cfg) {
    const char* m = cfg.method == IdMethod::CORLS ? "corls" : "ls";
    return (fs::path(cfg.output_dir) / (std::string("arx_") + m + ".json")).string();
}

void print_stats(const ErrorStats& st) {
    const char* names[3] = {"T_b", "T_w", "T_c"};
    std::printf("%-6s %12s %12s %12s\n", "output", "mean [K]", "std [K]", "mae [K]");
    for (int i = 0; i < 3; ++i)
        std::printf("%-6s %12.5f %12.5f %12.5f\n", names[i], st.mean[i], st.stddev[i],
                    st.mae[i]);
}

int cmd_simulate(const WorkbenchConfig& cfg) {
    auto [train, val] = simulate_dataset(cfg.plant, cfg.datagen, cfg.seed);
    train.config_hash = val.config_hash = cfg.hash();
    const fs::path out(cfg.output_dir);
    write_dataset_csv(train, (out / "train.csv").string());
    write_dataset_csv(val, (out / "validation.csv").string());
    save_config(cfg, (out / "config.json").string());
    std::printf("wrote %s (%ld rows) and %s (%ld rows)\n",
                (out / "train.csv").c_str(), train.rows(),
                (out / "validation.csv").c_str(), val.rows());
    return kExitOk;
}

int cmd_identify(const WorkbenchConfig& cfg) {
    const fs::path out(cfg.output_dir);
    const Dataset train = read_dataset_checked((out / "train.csv").string());
    const ArxParams par = identify(train, cfg.sigma, cfg.method, cfg.P);
    const std::string path = params_path(cfg);
    save_arx_json(par, path);

    // append provenance
    std::ifstream in(path);
    nlohmann::json j = nlohmann::json::parse(in);
    in.close();
    j["method"] = cfg.method == IdMethod::CORLS ? "CORLS" : "LS";
    j["P"] = cfg.P;
    j["seed"] = cfg.seed;
    j["config_hash"] = cfg.hash();
    std::ofstream outp(path);
    outp << j.dump(2) << '\n';

    std::printf("wrote %s (sigma=%d, p=%d, m=%d)\n", path.c_str(), par.sigma, par.p,
                par.m);
    return kExitOk;
}

int cmd_validate(const WorkbenchConfig& cfg, const std::string& mode) {
    const fs::path out(cfg.output_dir);
    const ArxParams par = load_params_checked(params_path(cfg));
    const Dataset val = read_dataset_checked((out / "validation.csv").string());

    if (mode == "single") {
        const Eigen::MatrixXd errs = prediction_errors(par, val);
        write_errors_csv(errs, (out / "single_errors.csv").string());
        std::printf("single-step prediction errors (%ld samples)\n", errs.rows());
        print_stats(error_stats(errs));
        return kExitOk;
    }

    // multi-step: the validation split alone is shorter than n_samples windows of
    // length N + sigma, so the profile runs over the full simulated record.
    const Dataset train = read_dataset_checked((out / "train.csv").string());
    Dataset full = train;
    const long nt = train.rows(), nv = val.rows();
    full.U.conservativeResize(nt + nv, Eigen::NoChange);
    full.Y.conservativeResize(nt + nv, Eigen::NoChange);
    full.U.bottomRows(nv) = val.U;
    full.Y.bottomRows(nv) = val.Y;

    const HorizonProfile prof =
        horizon_error_profile(par, full, cfg.val_horizon, cfg.val_samples);
    write_profile_csv(prof, (out / "horizon_profile.csv").string());
    std::printf("multi-step profile: %d windows, horizon %d\n", prof.n_samples,
                cfg.val_horizon);
    const long last = prof.mean.rows() - 1;
    std::printf("error at horizon end: mean (%.4f, %.4f, %.4f) K, std (%.4f, %.4f, %.4f) K\n",
                prof.mean(last, 0), prof.mean(last, 1), prof.mean(last, 2),
                prof.stddev(last, 0), prof.stddev(last, 1), prof.stddev(last, 2));
    return kExitOk;
}

int cmd_mpc(const WorkbenchConfig& cfg) {
    const fs::path out(cfg.output_dir);
    const ArxParams par = load_params_checked(params_path(cfg));

    // The scenario picks up where the identification campaign left off, so the
    // controller operates at the state the model was fitted around.
    Plant plant = replay_campaign(cfg.plant, cfg.datagen, cfg.seed);
    const int n = cfg.mpc_duration;
    const std::vector<double> demand =
        cfg.demand_profile.empty()
            ? builtin_demand_profile(n, cfg.plant.dt)
            : load_demand_profile(cfg.demand_profile, n, cfg.plant.dt);
    const std::vector<double> tr =
        return_temp_profile(n + cfg.ocp.N + 1, derive_seed(cfg.seed, 3),
                            cfg.mpc_tr_low, cfg.mpc_tr_high, cfg.plant.dt);

    ClosedLoopConfig cl;
    cl.ocp = cfg.ocp;
    cl.margin = cfg.margin;
    const TrajectoryLog log = closed_loop(plant, par, cl, demand, tr);
    write_trajectory_csv(log, (out / "trajectory.csv").string());

    int satisfied = 0, counted = 0;
    const int transient = int(2.0 * 3600.0 / cfg.plant.dt);
    for (size_t k = transient; k < log.t.size(); ++k) {
        ++counted;
        if (log.delivered_W[k] >= log.demand_W[k]) ++satisfied;
    }
    const double sat = counted ? 100.0 * satisfied / counted : 0.0;

    nlohmann::json rep{{"mean_solve_ms", log.mean_solve_ms},
                       {"max_solve_ms", log.max_solve_ms},
                       {"demand_satisfaction_pct", sat},
                       {"max_slack_K", log.max_eps},
                       {"steps", log.t.size()},
                       {"config_hash", cfg.hash()},
                       {"seed", cfg.seed}};
    std::ofstream rf(out / "mpc_report.json");
    rf << rep.dump(2) << '\n';
    std::printf("closed loop: %zu steps, mean solve %.1f ms, satisfaction %.1f%%, max slack %.4f K\n",
                log.t.size(), log.mean_solve_ms, sat, log.max_eps);
    return kExitOk;
}

int cmd_report(const WorkbenchConfig& cfg) {
    const fs::path out(cfg.output_dir);
    const std::string expect = cfg.hash();
    bool all_ok = true;
    int checked = 0;

    auto check_json = [&](const fs::path& p, const char* key) {
        if (!fs::exists(p)) return;
        std::ifstream f(p);
        try {
            nlohmann::json j = nlohmann::json::parse(f);
            if (!j.contains(key)) return;
            const std::string h = j.at(key).get<std::string>();
            const bool ok = h == expect;
            all_ok = all_ok && ok;
            ++checked;
            std::printf("%-28s %s\n", p.filename().c_str(), ok ? "hash ok" : "HASH MISMATCH");
        } catch (const std::exception&) {
            all_ok = false;
            std::printf("%-28s unreadable\n", p.filename().c_str());
        }
    };
    check_json(out / "train.json", "config_hash");
    check_json(out / "validation.json", "config_hash");
    check_json(out / "arx_corls.json", "config_hash");
    check_json(out / "arx_ls.json", "config_hash");
    check_json(out / "mpc_report.json", "config_hash");

    if (checked == 0) {
        std::fprintf(stderr, "no artifacts found in %s\n", out.c_str());
        return kExitData;
    }
    std::printf("%d artifact(s) checked against config %s\n", checked, expect.c_str());
    return all_ok ? kExitOk : kExitData;
}

int cmd_sweep(const WorkbenchConfig& cfg, int n_seeds) {
    // Monte-Carlo over seeds: full simulate/identify/validate pipeline per seed,
    // single-step statistics printed per seed.
    std::vector<std::array<double, 9>> stats(n_seeds); // mean3, std3, mae3
    std::vector<std::string> errors(n_seeds);

    auto work = [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            try {
                const std::uint64_t seed = cfg.seed + std::uint64_t(i);
                auto [train, val] = simulate_dataset(cfg.plant, cfg.datagen, seed);
                const ArxParams par = identify(train, cfg.sigma, cfg.method, cfg.P);
                const ErrorStats st = validate_single_step(par, val);
                for (int j = 0; j < 3; ++j) {
                    stats[i][j] = st.mean[j];
                    stats[i][3 + j] = st.stddev[j];
                    stats[i][6 + j] = st.mae[j];
                }
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };

    const int jobs = std::max(1, cfg.jobs);
    std::vector<std::thread> threads;
    const int chunk = (n_seeds + jobs - 1) / jobs;
    for (int t = 0; t < jobs; ++t) {
        const int lo = t * chunk, hi = std::min(n_seeds, lo + chunk);
        if (lo < hi) threads.emplace_back(work, lo, hi);
    }
    for (auto& th : threads) th.join();

    std::printf("%6s %32s %32s %32s\n", "seed", "mean(T_b,T_w,T_c) [K]",
                "std [K]", "mae [K]");
    for (int i = 0; i < n_seeds; ++i) {
        if (!errors[i].empty()) {
            std::printf("%6llu failed: %s\n",
                        static_cast<unsigned long long>(cfg.seed + i), errors[i].c_str());
            continue;
        }
        const auto& s = stats[i];
        std::printf("%6llu %10.4f %10.4f %10.4f %10.4f %10.4f %10.4f %10.4f %10.4f %10.4f\n",
                    static_cast<unsigned long long>(cfg.seed + i), s[0], s[1], s[2],
                    s[3], s[4], s[5], s[6], s[7], s[8]);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ATES simulation / identification / MPC workbench"};
    app.require_subcommand(1);

    std::string config_path, mode = "single", method_flag, out_dir;
    std::int64_t seed_flag = -1;
    int sigma_flag = -1, P_flag = -1, horizon_flag = -1, samples_flag = -1,
        duration_flag = -1, jobs_flag = -1, n_seeds = 10;
    double margin_flag = -1.0;

    app.add_option("--config", config_path, "JSON config file (defaults baked in)");
    app.add_option("--seed", seed_flag, "override seed");
    app.add_option("--out", out_dir, "override output directory");
    app.add_option("--jobs", jobs_flag, "worker threads for seed sweeps");

    auto* sim = app.add_subcommand("simulate", "generate train/validation datasets");
    auto* ident = app.add_subcommand("identify", "estimate ARX parameters");
    ident->add_option("--sigma", sigma_flag, "model order");
    ident->add_option("--P", P_flag, "correlation shift bound");
    ident->add_option("--method", method_flag, "LS or CORLS");
    auto* valcmd = app.add_subcommand("validate", "prediction-error statistics");
    valcmd->add_option("--mode", mode, "single or multi")
        ->check(CLI::IsMember({"single", "multi"}));
    valcmd->add_option("--horizon", horizon_flag, "multi-step horizon");
    valcmd->add_option("--samples", samples_flag, "multi-step windows");
    auto* mpccmd = app.add_subcommand("mpc", "closed-loop demand tracking");
    mpccmd->add_option("--duration", duration_flag, "closed-loop steps");
    mpccmd->add_option("--margin", margin_flag, "setpoint over-provisioning factor");
    auto* repcmd = app.add_subcommand("report", "re-verify artifact config hashes");
    auto* sweepcmd = app.add_subcommand("sweep", "single-step stats across seeds");
    sweepcmd->add_option("--seeds", n_seeds, "number of consecutive seeds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        WorkbenchConfig cfg =
            config_path.empty() ? WorkbenchConfig{} : load_config(config_path);
        if (const char* env = std::getenv("ATES_SEED"))
            cfg.seed = std::strtoull(env, nullptr, 10);
        if (seed_flag >= 0) cfg.seed = std::uint64_t(seed_flag);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (sigma_flag > 0) cfg.sigma = sigma_flag;
        if (P_flag > 0) cfg.P = P_flag;
        if (!method_flag.empty()) {
            if (method_flag == "LS") cfg.method = IdMethod::LS;
            else if (method_flag == "CORLS") cfg.method = IdMethod::CORLS;
            else throw ConfigError("--method must be LS or CORLS");
        }
        if (horizon_flag > 0) cfg.val_horizon = horizon_flag;
        if (samples_flag > 0) cfg.val_samples = samples_flag;
        if (duration_flag > 0) cfg.mpc_duration = duration_flag;
        if (margin_flag > 0) cfg.margin = margin_flag;
        if (jobs_flag > 0) cfg.jobs = jobs_flag;
        cfg.validate();

        if (sim->parsed()) return cmd_simulate(cfg);
        if (ident->parsed()) return cmd_identify(cfg);
        if (valcmd->parsed()) return cmd_validate(cfg, mode);
        if (mpccmd->parsed()) return cmd_mpc(cfg);
        if (repcmd->parsed()) return cmd_report(cfg);
        if (sweepcmd->parsed()) return cmd_sweep(cfg, n_seeds);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const InsufficientExcitation& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
}
