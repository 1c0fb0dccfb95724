// Command-line front end: coefficient caching, synthesis runs, simulator
// metrics, finite-dimensional baseline comparisons, CSV reports, and the
// randomized theorem-check suite.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sls/baseline.hpp"
#include "sls/csv.hpp"
#include "sls/model.hpp"
#include "sls/oracle.hpp"
#include "sls/qpsolve.hpp"
#include "sls/runconfig.hpp"
#include "sls/simulate.hpp"
#include "sls/slp.hpp"
#include "sls/synth.hpp"

namespace fs = std::filesystem;
using namespace sls;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitCheck = 4;

struct CommonOpts {
    std::string config_path;
    int jobs = 0;  // 0 = take from config
    std::string cache_dir;
    std::string output_dir;
    bool force = false;
    bool check = false;
};

void attach_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "JSON configuration file");
    sub->add_option("--jobs", opts.jobs, "worker thread count override");
    sub->add_option("--cache-dir", opts.cache_dir, "coefficient cache directory override");
    sub->add_option("--output-dir", opts.output_dir, "output directory override");
    sub->add_flag("--force", opts.force, "rebuild caches that do not match the configuration");
    sub->add_flag("--check", opts.check, "fail (exit 4) when verification thresholds are breached");
}

RunConfig make_config(const CommonOpts& opts) {
    RunConfig cfg = opts.config_path.empty() ? default_config() : load_config(opts.config_path);
    if (opts.jobs > 0) cfg.synth.jobs = opts.jobs;
    if (!opts.cache_dir.empty()) cfg.cache_dir = opts.cache_dir;
    if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
    cfg.validate();
    return cfg;
}

fs::path manifest_path(const RunConfig& cfg) { return fs::path(cfg.cache_dir) / "manifest.txt"; }

fs::path b_cache_path(const RunConfig& cfg, int l) {
    char name[32];
    std::snprintf(name, sizeof name, "b_%03d.csv", l);
    return fs::path(cfg.cache_dir) / name;
}

bool cache_valid(const RunConfig& cfg) {
    std::ifstream in(manifest_path(cfg));
    if (!in) return false;
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text == coeff_fingerprint(cfg);
}

// Returns the number of files written; 0 means the cache already matched.
int build_cache(const RunConfig& cfg) {
    if (cache_valid(cfg)) return 0;
    fs::create_directories(cfg.cache_dir);
    KernelModel model =
        build_model(cfg.r, cfg.n_u, cfg.synth.domain, cfg.synth.k, cfg.synth.jobs);
    write_coeffs(fs::path(cfg.cache_dir) / "a.csv", model.a_coeffs, model.domain, "a");
    for (int l = 0; l < model.n_u(); ++l) {
        char role[32];
        std::snprintf(role, sizeof role, "b_%03d", l);
        write_coeffs(b_cache_path(cfg, l), model.b_coeffs[l], model.domain, role);
    }
    std::ofstream out(manifest_path(cfg), std::ios::trunc);
    out << coeff_fingerprint(cfg);
    if (!out) throw ConfigError("cannot write cache manifest in " + cfg.cache_dir);
    return model.n_u() + 1;
}

void require_cache_fresh(const RunConfig& cfg, bool force) {
    if (force || cache_valid(cfg) || !fs::exists(manifest_path(cfg))) return;
    throw ConfigError("cache in " + cfg.cache_dir +
                      " was built from a different configuration; rerun with --force");
}

KernelModel load_cached_model(const RunConfig& cfg) {
    const double r = cfg.r;
    KernelModel model;
    model.r = r;
    model.domain = cfg.synth.domain;
    model.a_raw = [r](Point2 z) { return raised_cosine(z, r); };
    model.actuators = actuator_grid(cfg.n_u, cfg.synth.domain);
    CoeffFile a = read_coeffs(fs::path(cfg.cache_dir) / "a.csv");
    if (a.k != cfg.synth.k) throw ConfigError("cached coefficients use a different order k");
    model.a_coeffs = a.field;
    model.b_coeffs.reserve(cfg.n_u);
    for (int l = 0; l < cfg.n_u; ++l) model.b_coeffs.push_back(read_coeffs(b_cache_path(cfg, l)).field);
    return model;
}

KernelModel obtain_model(const RunConfig& cfg, bool force) {
    require_cache_fresh(cfg, force);
    build_cache(cfg);
    return load_cached_model(cfg);
}

fs::path bank_dir(const RunConfig& cfg) { return fs::path(cfg.output_dir) / "bank"; }

ResponseBank load_bank_checked(const RunConfig& cfg) {
    try {
        return load_bank(bank_dir(cfg));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("cannot load response bank (run synthesize first): ") +
                          e.what());
    }
}

int cmd_coeffs(const CommonOpts& opts) {
    RunConfig cfg = make_config(opts);
    require_cache_fresh(cfg, opts.force);
    const int written = build_cache(cfg);
    if (written == 0)
        std::cout << "coefficient cache up to date (" << cfg.cache_dir << ")\n";
    else
        std::cout << "wrote " << written << " coefficient files to " << cfg.cache_dir << "\n";
    return kExitOk;
}

int cmd_synthesize(const CommonOpts& opts) {
    RunConfig cfg = make_config(opts);
    KernelModel model = obtain_model(cfg, opts.force);
    std::vector<Point2> disturbances = resolve_disturbances(cfg);
    ResponseBank bank = synthesize_bank(model, cfg.synth, disturbances);
    fs::create_directories(bank_dir(cfg));
    save_bank(bank_dir(cfg), bank, model.domain,
              {{"config_digest", digest(coeff_fingerprint(cfg))}});
    for (size_t d = 0; d < bank.responses.size(); ++d) {
        const DisturbanceResponse& resp = bank.responses[d];
        std::printf("disturbance %zu at (%.6g, %.6g): objective %.10g, residual %.3g\n", d,
                    resp.zt.z1, resp.zt.z2, resp.objective, resp.primal_residual);
    }
    std::cout << "bank written to " << bank_dir(cfg).string() << "\n";
    return kExitOk;
}

int cmd_simulate(const CommonOpts& opts) {
    RunConfig cfg = make_config(opts);
    KernelModel model = obtain_model(cfg, opts.force);
    ResponseBank bank = load_bank_checked(cfg);
    bool breach = false;
    for (size_t d = 0; d < bank.responses.size(); ++d) {
        const DisturbanceResponse& resp = bank.responses[d];
        std::vector<double> err = basis_accuracy(resp, model, cfg.grid_n);
        std::vector<double> gain = performance_gain(resp, model, cfg.grid_n);
        for (size_t t = 0; t < err.size(); ++t) {
            std::printf("disturbance %zu t=%zu: error %.4f%%, gain %.2f%%\n", d, t + 1,
                        100.0 * err[t], gain[t]);
            if (err[t] > 0.01) breach = true;
        }
    }
    if (opts.check && breach) {
        std::cerr << "check failed: basis-accuracy error above 1%\n";
        return kExitCheck;
    }
    return kExitOk;
}

// Comparison rows for table3.csv: continuous pipeline first, then one row
// per lattice spacing.
std::vector<Table3Row> baseline_rows(const RunConfig& cfg, const KernelModel& model,
                                     const DisturbanceResponse& resp) {
    std::vector<Table3Row> rows;
    Table3Row cont;
    cont.method = "continuous";
    cont.dx = 0.0;
    cont.n_x = 0;
    cont.avg_perf_gain_pct = average_gain(performance_gain(resp, model, cfg.grid_n));
    rows.push_back(cont);

    std::vector<double> dxs = cfg.baseline_dx;
    if (cfg.baseline_fine_dx) dxs.push_back(0.1);
    for (double dx : dxs) {
        FiniteDimSystem sys = discretize(model, dx);
        FiniteCLMs clms =
            finite_sls(sys, cfg.synth.Q, cfg.synth.R, cfg.synth.T, cfg.baseline_scale_cost);
        std::vector<double> gains = evaluate_in_continuous(sys, clms, model, resp.zt, cfg.grid_n);
        Table3Row row;
        row.method = "finite-dim";
        row.dx = dx;
        row.n_x = sys.n_x();
        row.avg_perf_gain_pct = average_gain(gains);
        rows.push_back(row);
    }
    return rows;
}

DisturbanceResponse first_response(const RunConfig& cfg, const KernelModel& model) {
    if (fs::exists(bank_dir(cfg) / "meta")) {
        ResponseBank bank = load_bank_checked(cfg);
        if (!bank.responses.empty()) return bank.responses.front();
    }
    return synthesize_one(model, cfg.synth, resolve_disturbances(cfg).front());
}

int cmd_baseline(const CommonOpts& opts) {
    RunConfig cfg = make_config(opts);
    KernelModel model = obtain_model(cfg, opts.force);
    DisturbanceResponse resp = first_response(cfg, model);
    std::vector<Table3Row> rows = baseline_rows(cfg, model, resp);
    bool ordered = true;
    for (const Table3Row& row : rows) {
        std::printf("%-12s dx=%-6.3g n_x=%-5d avg gain %.2f%%\n", row.method.c_str(), row.dx,
                    row.n_x, row.avg_perf_gain_pct);
        if (row.method != "continuous" &&
            row.avg_perf_gain_pct >= rows.front().avg_perf_gain_pct)
            ordered = false;
    }
    if (opts.check && !ordered) {
        std::cerr << "check failed: a finite-dim baseline matched or beat the continuous "
                     "pipeline\n";
        return kExitCheck;
    }
    return kExitOk;
}

int cmd_report(const CommonOpts& opts) {
    RunConfig cfg = make_config(opts);
    KernelModel model = obtain_model(cfg, opts.force);
    ResponseBank bank = load_bank_checked(cfg);
    if (bank.responses.empty()) throw ConfigError("response bank is empty");
    const DisturbanceResponse& resp = bank.responses.front();
    fs::create_directories(cfg.output_dir);

    std::vector<double> err = basis_accuracy(resp, model, cfg.grid_n);
    std::vector<double> gain = performance_gain(resp, model, cfg.grid_n);
    std::vector<Table1Row> t1;
    for (size_t t = 0; t < err.size(); ++t)
        t1.push_back({static_cast<int>(t) + 1, 100.0 * err[t], gain[t]});
    write_table1(fs::path(cfg.output_dir) / "table1.csv", t1);

    write_table3(fs::path(cfg.output_dir) / "table3.csv", baseline_rows(cfg, model, resp));

    fs::path fields = fs::path(cfg.output_dir) / "fields";
    fs::create_directories(fields);
    SimGrid grid = make_grid(model.domain, cfg.grid_n);
    std::vector<Point2> pts = grid.points();
    std::vector<Eigen::VectorXd> zero_inputs(
        bank.T, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.actuators.size())));
    TrajectoryGrid open = rollout(model, ImpulseInit{resp.zt, 1.0}, zero_inputs, cfg.grid_n);
    for (int t = 1; t <= bank.T; ++t) {
        char name[48];
        std::snprintf(name, sizeof name, "state_t%d.csv", t);
        std::vector<double> vals =
            synthesize_tensor(resp.alpha[t - 1], grid.xs, grid.ys, model.domain);
        write_grid_dump(fields / name, pts, vals);
        std::snprintf(name, sizeof name, "uncontrolled_t%d.csv", t);
        write_grid_dump(fields / name, pts, open.states[t]);
    }
    std::cout << "wrote table1.csv, table3.csv and " << 2 * bank.T << " field dumps under "
              << cfg.output_dir << "\n";
    return kExitOk;
}

int cmd_oracle(const CommonOpts& opts, int count, unsigned seed) {
    OracleSummary sum = run_oracle_suite(count, seed);
    std::printf("oracle suite: %d systems, %d failures, worst residual %.3g\n", sum.systems,
                sum.failures, sum.worst_residual);
    if (opts.check && sum.failures > 0) return kExitCheck;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"infinite-dimensional SLS synthesis toolkit"};
    app.require_subcommand(1);

    CommonOpts coeffs_o, synth_o, sim_o, base_o, report_o, oracle_o;
    int oracle_count = 200;
    unsigned oracle_seed = 12345;

    attach_common(app.add_subcommand("coeffs", "build the coefficient cache"), coeffs_o);
    attach_common(app.add_subcommand("synthesize", "solve the per-disturbance programs"), synth_o);
    attach_common(app.add_subcommand("simulate", "score the bank in the quadrature simulator"),
                  sim_o);
    attach_common(app.add_subcommand("baseline", "compare against discretize-then-optimize"),
                  base_o);
    attach_common(app.add_subcommand("report", "emit CSV tables and field dumps"), report_o);
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "run the randomized theorem checks");
    attach_common(oracle_cmd, oracle_o);
    oracle_cmd->add_option("--count", oracle_count, "number of random systems");
    oracle_cmd->add_option("--seed", oracle_seed, "random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("coeffs")) return cmd_coeffs(coeffs_o);
        if (app.got_subcommand("synthesize")) return cmd_synthesize(synth_o);
        if (app.got_subcommand("simulate")) return cmd_simulate(sim_o);
        if (app.got_subcommand("baseline")) return cmd_baseline(base_o);
        if (app.got_subcommand("report")) return cmd_report(report_o);
        if (app.got_subcommand("oracle")) return cmd_oracle(oracle_o, oracle_count, oracle_seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const QPError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitOk;
}
