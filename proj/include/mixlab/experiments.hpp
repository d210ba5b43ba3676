#ifndef MIXLAB_EXPERIMENTS_HPP
#define MIXLAB_EXPERIMENTS_HPP

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "mixlab/config.hpp"
#include "mixlab/core.hpp"
#include "mixlab/data.hpp"
#include "mixlab/diagnostics.hpp"
#include "mixlab/io.hpp"
#include "mixlab/oracle.hpp"
#include "mixlab/pool.hpp"

namespace mixlab {

inline const char* version_string() { return "mixlab 0.1.0"; }

namespace experiments {

namespace fs = std::filesystem;

inline json rate_to_json(const RateEstimate& r) {
    return json{{"exponent", r.exponent}, {"prefactor", r.prefactor},
                {"window_lo", r.window_lo}, {"window_hi", r.window_hi},
                {"residual", r.residual}, {"n_points", r.n_points}};
}

// ---------------------------------------------------------------------------

inline std::vector<std::string> run_period_table(const ExperimentConfig& cfg,
                                                 const fs::path& dir, int workers) {
    int count = (int)cfg.get_int("levels.count", 50);
    double lo = cfg.get_double("levels.h_min", 0.05);
    double hi = cfg.get_double("levels.h_max", 0.95);
    std::string scale = cfg.get_str("levels.scale", "linear");
    std::vector<double> levels =
        scale == "log" ? logspace(lo, hi, count) : linspace(lo, hi, count);
    PeriodTable table;
    table.levels = levels;
    table.T.resize(count);
    table.Tprime.resize(count);
    table.method.assign(count, "agm");
    parallel_for(count, workers, [&](size_t i) {
        table.T[i] = period_agm(levels[i]);
        table.Tprime[i] = period_derivative(levels[i]);
    });
    write_period_table_csv(dir / "period_table.csv", table);
    return {"period_table.csv"};
}

// ---------------------------------------------------------------------------

inline std::vector<std::string> run_chart_validate(const ExperimentConfig& cfg,
                                                   const fs::path& dir, int workers) {
    (void)workers;
    int n_theta = (int)cfg.get_int("chart.n_theta", 64);
    int n_levels = (int)cfg.get_int("chart.n_levels", 32);
    double h_lo = cfg.get_double("annulus.h_lo", 0.2);
    double h_hi = cfg.get_double("annulus.h_hi", 0.8);
    std::string variant_s = cfg.get_str("chart.variant", "standard");
    auto variant = variant_s == "cellular" ? ActionAngleChart::CellularTilde
                                           : ActionAngleChart::Standard;
    double s_lo = variant == ActionAngleChart::Standard ? h_lo : std::asin(h_lo);
    double s_hi = variant == ActionAngleChart::Standard ? h_hi : std::asin(h_hi);
    auto chart = build_cellular_chart(s_lo, s_hi, n_levels, n_theta, variant);

    double max_jac_err = 0.0, max_level_drift = 0.0;
    for (size_t i = 0; i < chart.s.size(); ++i) {
        double ref = chart.jac_reference(i);
        for (int j = 0; j < chart.n_theta; ++j) {
            max_jac_err = std::max(max_jac_err, std::abs(chart.jac[i][j] - ref) / ref);
            max_level_drift = std::max(
                max_level_drift, std::abs(chart.field.eval(chart.pos[i][j]) - chart.h[i]));
        }
    }

    // angle evolution law on seeded random (x, t) pairs
    int samples = (int)cfg.get_int("samples", 100);
    Rng rng((unsigned long)cfg.get_int("seed", 0));
    std::uniform_real_distribution<double> uth(0.0, 1.0);
    std::uniform_real_distribution<double> us(s_lo + 0.02 * (s_hi - s_lo),
                                              s_hi - 0.02 * (s_hi - s_lo));
    double max_evo_err = 0.0;
    for (int trial = 0; trial < samples; ++trial) {
        double s = us(rng);
        double h = variant == ActionAngleChart::Standard ? s : std::sin(s);
        Vec2 x = chart_eval(chart, uth(rng), s);
        double T = period_agm(h);
        double t = uth(rng) * 10.0 * T;
        Vec2 xt = flow_map(chart.field, x, t, 1e-12);
        double th0 = angle_of_point(chart, x).theta;
        double th1 = angle_of_point(chart, xt).theta;
        double defect = th1 - th0 - t / T;
        defect -= std::round(defect);
        max_evo_err = std::max(max_evo_err, std::abs(defect));
    }

    write_chart(dir / "chart.csv", dir / "chart_header.json", chart);
    json rep;
    rep["max_jacobian_rel_error"] = max_jac_err;
    rep["max_level_drift"] = max_level_drift;
    rep["max_evolution_law_error"] = max_evo_err;
    rep["samples"] = samples;
    write_json(dir / "report.json", rep);
    return {"chart.csv", "chart_header.json", "report.json"};
}

// ---------------------------------------------------------------------------

inline std::vector<std::string> run_mixing_decay(const ExperimentConfig& cfg,
                                                 const fs::path& dir, int workers) {
    (void)workers;
    int N = (int)cfg.get_int("grid.n", 256);
    double h_lo = cfg.get_double("annulus.h_lo", 0.3);
    double h_hi = cfg.get_double("annulus.h_hi", 0.7);
    int k = (int)cfg.get_int("init.k", 2);
    double t_min = cfg.get_double("fit.t_min", 20.0);
    double t_max = cfg.get_double("fit.t_max", 2000.0);
    int samples = (int)cfg.get_int("time.samples", 25);
    int n_theta = (int)cfg.get_int("chart.n_theta", 256);
    int n_levels = (int)cfg.get_int("chart.n_levels", 128);

    double s_lo = std::asin(h_lo), s_hi = std::asin(h_hi);
    auto chart = build_cellular_chart(s_lo, s_hi, n_levels, n_theta,
                                      ActionAngleChart::CellularTilde);
    auto inverse = build_chart_inverse(chart, N);

    auto Bk = [s_lo, s_hi](int, double s) {
        return std::complex<double>(0.5 * smooth_bump((s - s_lo) / (s_hi - s_lo)), 0.0);
    };
    std::vector<int> k_list{k};

    auto normalize_mean = [](ScalarField& f) { f.c[0] = 0.0; }; // kill round-off mean

    ScalarField rho0 = synthesize_oracle_field(inverse, k_list, Bk, 0.0);
    normalize_mean(rho0);
    double h1_initial = sobolev_norm(rho0, 1);

    std::vector<double> ts = logspace(t_min, t_max, samples);
    std::vector<double> hm1(ts.size());
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < ts.size(); ++i) {
        ScalarField rho = synthesize_oracle_field(inverse, k_list, Bk, ts[i]);
        normalize_mean(rho);
        hm1[i] = sobolev_norm(rho, -1);
        rows.push_back({ts[i], hm1[i]});
    }
    write_csv(dir / "mixing_decay.csv", {"t", "hminus1"}, rows);

    RateEstimate fit = fit_mixing_rate(ts, hm1, h1_initial);
    json rep;
    rep["h1_initial"] = h1_initial;
    rep["fit"] = rate_to_json(fit);
    write_json(dir / "report.json", rep);
    return {"mixing_decay.csv", "report.json"};
}

// ---------------------------------------------------------------------------

/** One nu-run of the sweep: fixed-CFL stepping with samples on a uniform
    grid, stopping once L2 has fallen by e^2 (the fit only needs the first
    e-fold). */
inline DissipationRun sweep_single_run(const HamiltonianField& field, const ScalarField& rho0,
                                       double nu, double t_cap, int samples, double cfl) {
    SpectralSolver::Options opt;
    opt.cfl = cfl;
    opt.track_dissipation = false;
    SpectralSolver solver(field, rho0.N, nu, opt);
    ScalarField u = rho0;
    DissipationRun run;
    run.nu = nu;
    double l2_0 = std::sqrt(l2_norm_sq(u));
    run.t.push_back(0.0);
    run.l2.push_back(l2_0);
    const double stop = l2_0 * std::exp(-2.2);
    double dt_sample = t_cap / samples;
    const double base_dt = solver.dt();
    for (int sidx = 1; sidx <= samples; ++sidx) {
        int nsub = (int)std::ceil(dt_sample / base_dt - 1e-12);
        solver.set_dt(dt_sample / nsub);
        for (int kk = 0; kk < nsub; ++kk) solver.step(u);
        double l2 = std::sqrt(l2_norm_sq(u));
        run.t.push_back(sidx * dt_sample);
        run.l2.push_back(l2);
        if (l2 <= stop) break;
    }
    return run;
}

inline std::vector<std::string> run_dissipation_sweep(const ExperimentConfig& cfg,
                                                      const fs::path& dir, int workers) {
    int N = (int)cfg.get_int("grid.n", 512);
    std::vector<double> nus = cfg.get_list("nu.list");
    double h_lo = cfg.get_double("annulus.h_lo", 0.3);
    double h_hi = cfg.get_double("annulus.h_hi", 0.7);
    int m = (int)cfg.get_int("init.m", 2);
    double t_cap = cfg.get_double("time.end", 400.0);
    int samples = (int)cfg.get_int("time.samples", 160);
    double cfl = cfg.get_double("tol.cfl", 0.5);

    HamiltonianField field = make_field(cfg.get_str("field", "cellular"));
    InitialDatum datum = annulus_bump(field, N, h_lo, h_hi, m);

    std::vector<DissipationRun> runs(nus.size());
    parallel_for(nus.size(), workers, [&](size_t i) {
        runs[i] = sweep_single_run(field, datum.rho, nus[i], t_cap, samples, cfl);
    });

    std::vector<std::string> artifacts;
    for (size_t i = 0; i < runs.size(); ++i) {
        std::vector<std::vector<double>> rows;
        for (size_t j = 0; j < runs[i].t.size(); ++j)
            rows.push_back({runs[i].t[j], runs[i].l2[j]});
        std::string name = "sweep_nu_" + std::to_string(i) + ".csv";
        write_csv(dir / name, {"t", "l2"}, rows);
        artifacts.push_back(name);
    }

    DissipationFit fit = fit_dissipation_rate(runs);
    json rep;
    rep["rows"] = json::array();
    for (const auto& r : fit.rates) {
        json flags = json::array();
        if (!r.reached) flags.push_back("never-reached-efold");
        if (!r.monotone_ok) flags.push_back("non-monotone");
        rep["rows"].push_back(json{{"nu", r.nu},
                                   {"lambda", r.lambda},
                                   {"efold_time", r.efold_time},
                                   {"flags", flags}});
    }
    rep["scaling"] = rate_to_json(fit.scaling);
    rep["grad_sup"] = datum.grad_sup;
    write_json(dir / "report.json", rep);
    artifacts.push_back("report.json");
    return artifacts;
}

// ---------------------------------------------------------------------------

inline std::vector<std::string> run_thm_main(const ExperimentConfig& cfg, const fs::path& dir,
                                             int workers) {
    (void)workers;
    ThmMainOptions opt;
    opt.N = (int)cfg.get_int("grid.n", 256);
    opt.m = (int)cfg.get_int("init.m", 2);
    opt.cfl = cfg.get_double("tol.cfl", 0.5);
    double h_lo = cfg.get_double("annulus.h_lo", 0.3);
    double h_hi = cfg.get_double("annulus.h_hi", 0.7);
    std::vector<double> nus =
        cfg.has("nu.list") ? cfg.get_list("nu.list") : std::vector<double>{1e-4};
    HamiltonianField field = make_field(cfg.get_str("field", "cellular"));
    ThmMainReport rep = verify_thm_main_protocol(field, h_lo, h_hi, nus, opt);
    json j;
    j["C_calibrated"] = rep.C_calibrated;
    j["eps0"] = rep.eps0;
    j["grad_sup"] = rep.grad_sup;
    j["rows"] = json::array();
    j["rows"].push_back(json{{"nu", 0.0}, {"t_star", 0.0}, {"l2_ratio", 1.0},
                             {"lhs", 0.0}, {"rhs", 0.0}, {"consistent", true}}); // t = 0 row
    for (const auto& r : rep.rows)
        j["rows"].push_back(json{{"nu", r.nu}, {"t_star", r.t_star}, {"l2_ratio", r.l2_ratio},
                                 {"lhs", r.lhs}, {"rhs", r.rhs}, {"consistent", r.consistent}});
    write_json(dir / "report.json", j);
    return {"report.json"};
}

// ---------------------------------------------------------------------------

inline std::vector<std::string> run_envelope_scan(const ExperimentConfig& cfg,
                                                  const fs::path& dir, int workers) {
    (void)workers;
    std::string regime_s = cfg.get_str("envelope.regime", "global");
    EnvelopeRegime regime = regime_s == "interior" ? EnvelopeRegime::Interior
                            : regime_s == "elliptic" ? EnvelopeRegime::Elliptic
                                                     : EnvelopeRegime::Global;
    double eps = cfg.get_double("envelope.eps", 0.05);
    double C = cfg.get_double("envelope.C", 1.0);
    double t_min = cfg.get_double("time.t_min", 1e2);
    double t_max = cfg.get_double("time.t_max", 1e6);
    int samples = (int)cfg.get_int("time.samples", 25);

    std::vector<double> ts = logspace(t_min, t_max, samples);
    std::vector<double> vals(ts.size());
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < ts.size(); ++i) {
        vals[i] = mixing_envelope(ts[i], eps, regime, C);
        rows.push_back({ts[i], vals[i]});
    }
    write_csv(dir / "envelope.csv", {"t", "envelope"}, rows);
    RateEstimate fit = fit_power_law(ts, vals);
    json rep;
    rep["regime"] = regime_s;
    rep["eps"] = eps;
    rep["C"] = C;
    rep["fit"] = rate_to_json(fit);
    write_json(dir / "report.json", rep);
    return {"envelope.csv", "report.json"};
}

} // namespace experiments

/** Dispatches the named experiment, writes its artifacts plus a manifest
    (config echo, code version, wall time), and returns the exit status.
    Failures produce a machine-readable error.json and a nonzero status. */
inline int run_experiment(const ExperimentConfig& cfg, const std::string& output_dir,
                          int workers) {
    namespace fs = std::filesystem;
    auto t0 = std::chrono::steady_clock::now();
    fs::path dir(output_dir);
    std::string experiment;
    try {
        validate_config(cfg);
        experiment = cfg.get_str("experiment");
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir))
            throw ConfigError("cannot create output directory '" + output_dir + "'");

        std::vector<std::string> artifacts;
        if (experiment == "period-table")
            artifacts = experiments::run_period_table(cfg, dir, workers);
        else if (experiment == "chart-validate")
            artifacts = experiments::run_chart_validate(cfg, dir, workers);
        else if (experiment == "mixing-decay")
            artifacts = experiments::run_mixing_decay(cfg, dir, workers);
        else if (experiment == "dissipation-sweep")
            artifacts = experiments::run_dissipation_sweep(cfg, dir, workers);
        else if (experiment == "thm-main-protocol")
            artifacts = experiments::run_thm_main(cfg, dir, workers);
        else if (experiment == "envelope-scan")
            artifacts = experiments::run_envelope_scan(cfg, dir, workers);
        else
            throw ConfigError("unknown experiment '" + experiment + "'");

        json manifest;
        manifest["version"] = version_string();
        manifest["experiment"] = experiment;
        manifest["config"] = json(cfg.kv);
        manifest["workers"] = workers;
        manifest["artifacts"] = artifacts;
        manifest["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_json(dir / "manifest.json", manifest);
        return 0;
    } catch (const ConfigError& e) {
        json err{{"error", e.what()}, {"type", "config"}, {"experiment", experiment}};
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (fs::is_directory(dir)) write_json(dir / "error.json", err);
        return 2;
    } catch (const std::exception& e) {
        json err{{"error", e.what()}, {"type", "runtime"}, {"experiment", experiment}};
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (fs::is_directory(dir)) write_json(dir / "error.json", err);
        return 3;
    }
}

} // namespace mixlab

#endif
