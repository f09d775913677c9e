#include "drheo/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "drheo/snapshot.hpp"

namespace drheo {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(error_kind::io, "cannot open " + path);
    f << text;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(error_kind::io, "cannot create output directory " + dir);
}

std::string snap_name(long index) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "snapshot_%06ld.bin", index);
    return buf;
}

// config echo plus the resolved values chosen at run time
void echo_config(const config& cfg, const std::string& out_dir,
                 const std::map<std::string, std::string>& resolved) {
    std::string text = cfg.echo();
    if (!resolved.empty()) {
        text += "# resolved\n";
        for (const auto& [k, v] : resolved) text += k + " = " + v + "\n";
    }
    write_text(out_dir + "/config.echo", text);
}

} // namespace

torus_grid grid_from_config(const config& cfg) {
    return torus_grid(static_cast<int>(cfg.get_long("grid.d", 2)),
                      static_cast<int>(cfg.get_long("grid.n", 32)),
                      cfg.get_double("grid.dealias_fraction", 2.0 / 3.0));
}

spectral_velocity initial_from_config(const config& cfg, const torus_grid& grid) {
    std::string kind = cfg.get_string("initial.kind", "taylor_green");
    if (kind == "taylor_green")
        return taylor_green(grid, cfg.get_double("initial.amplitude", 1.0));
    if (kind == "seeded_random_smooth") {
        int cutoff = static_cast<int>(cfg.get_long("initial.mode_cutoff", 5));
        return random_smooth(grid, cfg.get_u64("initial.seed", 1),
                             cfg.get_double("initial.spectral_decay", 4.0),
                             cfg.get_double("initial.kinetic_energy", 0.005), cutoff);
    }
    if (kind == "snapshot") {
        std::string path = cfg.get_string("initial.path");
        if (path.empty()) fail(error_kind::config, "initial.path required for snapshot start");
        spectral_velocity v = read_snapshot(path, grid.dealias_fraction);
        if (!(v.grid == grid)) v = v.resampled(grid);
        v.project();
        return v;
    }
    fail(error_kind::config, "unknown initial.kind: " + kind);
}

force_fn force_from_config(const config& cfg, const rheology_model& model) {
    std::string kind = cfg.get_string("force.kind", "none");
    if (kind == "none") return {};
    if (kind == "manufactured") {
        double amp = cfg.get_double("force.amplitude", 0.25);
        double omega = cfg.get_double("force.omega", kPi / 2.0);
        return reference_solution::manufactured(model, amp, omega).force();
    }
    fail(error_kind::config, "unknown force.kind: " + kind);
}

double mu0_from_config(const config& cfg, const rheology_model& model) {
    std::string s = cfg.get_string("time.mu0", "0");
    if (s == "auto") {
        if (model.kind() == rheology_kind::anisotropic_wrap || model.kind() == rheology_kind::euler)
            return 0.0;
        double mu = model.mu_of(0.0);
        return std::isfinite(mu) ? mu : 0.0;
    }
    return cfg.get_double("time.mu0", 0.0);
}

namespace {

struct sim_setup {
    rheology_model model;
    torus_grid grid;
    spectral_velocity v0;
    force_fn force;
    drive_options dro;
};

sim_setup make_setup(const config& cfg) {
    sim_setup s{cfg.make_model(), grid_from_config(cfg), {}, {}, {}};
    s.v0 = initial_from_config(cfg, s.grid);
    s.force = force_from_config(cfg, s.model);
    s.dro.t_final = cfg.get_double("time.t_final", 1.0);
    std::string dt = cfg.get_string("time.dt", "auto");
    s.dro.fixed_dt = (dt == "auto") ? 0.0 : cfg.require_double("time.dt");
    s.dro.record_stride = static_cast<int>(cfg.get_long("time.record_stride", 1));
    s.dro.mu0 = mu0_from_config(cfg, s.model);
    long dn = cfg.get_long("experiment.defect_coarse_n", s.grid.n / 2);
    s.dro.diag_coarse_n = static_cast<int>(dn);
    return s;
}

experiment_result finish_simulation(const config& cfg, const std::string& out_dir,
                                    const sim_setup& s, const drive_result& run,
                                    ordered_json extra = {}) {
    experiment_result res;
    res.steps = run.steps;
    res.min_dt = run.min_dt;
    res.max_gap = run.ledger.max_gap();

    run.ledger.write_csv(out_dir + "/ledger.csv");
    long snap_stride = cfg.get_long("output.snapshot_stride", 0);
    const auto& snaps = run.snapshots;
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        bool last = (i + 1 == snaps.size());
        if (last || (snap_stride > 0 && i % static_cast<std::size_t>(snap_stride) == 0))
            write_snapshot(snaps[i], out_dir + "/" + snap_name(static_cast<long>(i)));
    }
    if (!run.defects.empty()) run.defects.back().write_csv(out_dir + "/defect.csv");

    regularity_verdict reg = regularity_diagnostic(run.ledger, run.defects,
                                                   cfg.get_double("experiment.reg_tol", 1e-6));
    bool cert = run.ledger.certificate_ok(cfg.get_double("experiment.cert_tol", 1e-6));
    bool gap_ok = run.ledger.gap_nonnegative_ok();
    res.certificate_ok = cert && gap_ok;
    res.ok = !run.aborted;
    res.message = run.abort_reason;
    res.verdict = reg.strong_consistent ? "strong-consistent" : "unsaturated";

    ordered_json j;
    j["experiment"] = cfg.get_string("experiment.kind", "simulate");
    j["steps"] = run.steps;
    j["min_dt"] = run.min_dt;
    j["records"] = run.ledger.rows().size();
    j["kinetic_initial"] = run.ledger.initial_kinetic();
    j["kinetic_final"] = run.ledger.rows().empty() ? 0.0 : run.ledger.rows().back().kinetic;
    j["max_gap"] = res.max_gap;
    j["certificate_ok"] = cert;
    j["gap_nonnegative_ok"] = gap_ok;
    j["certificate_worst_slack"] = run.ledger.certificate_worst_slack();
    j["budget_residual_max"] = run.ledger.max_abs_budget_residual();
    j["regularity"] = {{"strong_consistent", reg.strong_consistent},
                       {"budget_gap", reg.budget_gap},
                       {"defect_trace", reg.defect_trace},
                       {"reg_tol", reg.reg_tol}};
    j["aborted"] = run.aborted;
    if (run.aborted) j["abort_reason"] = run.abort_reason;
    j["worker_count"] = 1;
    j["format_version"] = snapshot_format_version;
    if (!extra.is_null()) j["extra"] = extra;
    write_text(out_dir + "/summary.json", j.dump(2) + "\n");
    return res;
}

} // namespace

experiment_result run_simulate(const config& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    sim_setup s = make_setup(cfg);

    std::map<std::string, std::string> resolved;
    resolved["resolved.mu0"] = fmt_double(s.dro.mu0);
    resolved["resolved.seed"] = std::to_string(cfg.get_u64("initial.seed", 1));
    if (s.dro.fixed_dt <= 0.0) {
        fft_workspace fft(s.grid);
        spectral_velocity v = s.v0;
        v.project();
        double bound = cfl_limit(s.model, v, fft, s.dro.mu0);
        resolved["resolved.dt_initial"] = fmt_double(std::isfinite(bound) ? 0.5 * bound : s.dro.t_final);
    } else {
        resolved["resolved.dt_initial"] = fmt_double(s.dro.fixed_dt);
    }
    echo_config(cfg, out_dir, resolved);

    drive_result run = drive(s.model, s.v0, s.dro, s.force);
    return finish_simulation(cfg, out_dir, s, run);
}

experiment_result run_taylor_green(const config& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    config c = cfg;
    c.set("initial.kind", "taylor_green");
    if (!c.has("time.mu0")) c.set("time.mu0", "auto");
    sim_setup s = make_setup(c);
    if (s.model.kind() != rheology_kind::newtonian && s.model.kind() != rheology_kind::euler)
        fail(error_kind::config, "taylor-green benchmark needs a newtonian or euler law");

    std::map<std::string, std::string> resolved;
    resolved["resolved.mu0"] = fmt_double(s.dro.mu0);
    echo_config(c, out_dir, resolved);

    drive_result run = drive(s.model, s.v0, s.dro, s.force);

    // exact vortex kinetic energy: on this torus the mode decays at rate
    // mu pi^2, so KE(t) = KE(0) exp(-2 mu pi^2 t); euler conserves it
    const double ke0 = run.ledger.initial_kinetic();
    const double mu = s.model.kind() == rheology_kind::newtonian ? s.model.param_mu() : 0.0;
    std::string csv = "time,kinetic,kinetic_exact,rel_err\n";
    double worst = 0;
    for (const auto& row : run.ledger.rows()) {
        double exact = ke0 * std::exp(-2.0 * mu * kPi * kPi * row.time);
        double rel = std::abs(row.kinetic - exact) / std::max(exact, 1e-300);
        worst = std::max(worst, rel);
        csv += fmt_double(row.time) + "," + fmt_double(row.kinetic) + "," + fmt_double(exact) +
               "," + fmt_double(rel) + "\n";
    }
    write_text(out_dir + "/taylor_green.csv", csv);

    ordered_json extra;
    extra["decay_rate"] = 2.0 * mu * kPi * kPi;
    extra["max_rel_err"] = worst;
    experiment_result res = finish_simulation(c, out_dir, s, run, extra);
    res.max_rel_err = worst;
    double tol = cfg.get_double("experiment.tg_tol", 1e-6);
    if (worst > tol) res.certificate_ok = false;
    return res;
}

namespace {

std::string conjugate_table_csv(const config& cfg, const rheology_model& model) {
    std::vector<double> svals = cfg.get_double_list("experiment.table_values");
    if (svals.empty()) {
        double lo = cfg.get_double("experiment.table_min", 1e-3);
        double hi = cfg.get_double("experiment.table_max", 1e3);
        long pts = cfg.get_long("experiment.table_points", 31);
        for (long i = 0; i < pts; ++i) {
            double f = (pts == 1) ? 0.0 : static_cast<double>(i) / static_cast<double>(pts - 1);
            svals.push_back(lo * std::pow(hi / lo, f));
        }
    }
    const bool closed = model.fstar_closed_available();
    std::string csv = "s_norm,fstar_numeric,fstar_closed,rel_diff\n";
    for (double sn : svals) {
        double num = model.fstar_radial_numeric(sn);
        double cl = closed ? model.fstar_radial_closed(sn) : std::nan("");
        double rd = closed ? std::abs(num - cl) / std::max(std::abs(cl), 1e-300) : std::nan("");
        csv += fmt_double(sn) + "," + fmt_double(num) + "," + fmt_double(cl) + "," +
               fmt_double(rd) + "\n";
    }
    return csv;
}

} // namespace

experiment_result run_verify_rheology(const config& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    rheology_model model = cfg.make_model();
    echo_config(cfg, out_dir, {});

    int samples = static_cast<int>(cfg.get_long("experiment.samples", 400));
    hypothesis_report rep = validate_hypotheses(model, samples, cfg.get_u64("initial.seed", 0x5eed));

    ordered_json j;
    j["kind"] = to_string(model.kind());
    j["samples"] = samples;
    j["fenchel_young_ok"] = rep.fenchel_young_ok;
    j["conjugate_superlinear_slope_at"] = rep.conjugate_superlinear_slope_at;
    j["f_domain_full"] = rep.f_domain_full;
    j["f_star_ball_radius"] = rep.f_star_ball_radius;
    j["f_infinity_linear_bound"] = rep.f_infinity_linear_bound;
    j["dd4_ok"] = rep.dd4_ok;
    j["dd5_ok"] = rep.dd5_ok;
    j["dd6_ok"] = rep.dd6_ok;
    j["dd7_ok"] = rep.dd7_ok;
    j["all_ok"] = rep.all_ok;
    write_text(out_dir + "/hypotheses.json", j.dump(2) + "\n");

    if (model.kind() != rheology_kind::anisotropic_wrap && model.kind() != rheology_kind::euler)
        write_text(out_dir + "/conjugate_table.csv", conjugate_table_csv(cfg, model));

    experiment_result res;
    res.certificate_ok = rep.fenchel_young_ok;
    res.verdict = rep.all_ok ? "all-hypotheses-pass" : "hypothesis-failures-reported";
    return res;
}

experiment_result run_conjugate_table(const config& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    rheology_model model = cfg.make_model();
    if (model.kind() == rheology_kind::anisotropic_wrap || model.kind() == rheology_kind::euler)
        fail(error_kind::config, "conjugate-table needs an isotropic law");
    echo_config(cfg, out_dir, {});
    write_text(out_dir + "/conjugate_table.csv", conjugate_table_csv(cfg, model));
    experiment_result res;
    res.verdict = "table-written";
    return res;
}

experiment_result run_weak_strong(const config& cfg, const std::string& out_dir, int threads) {
    ensure_dir(out_dir);

    weak_strong_config ws;
    ws.d = static_cast<int>(cfg.get_long("grid.d", 2));
    std::vector<int> cn = cfg.get_int_list("experiment.coarse_n");
    if (!cn.empty()) ws.coarse_n = cn;
    ws.reference_n = static_cast<int>(cfg.get_long("experiment.reference_n", 128));
    ws.dealias_fraction = cfg.get_double("grid.dealias_fraction", 2.0 / 3.0);
    ws.model = cfg.make_model();
    ws.t_final = cfg.get_double("time.t_final", 0.5);
    ws.record_dt = cfg.get_double("experiment.record_dt", ws.t_final / 25.0);
    ws.seed = cfg.get_u64("initial.seed", 7);
    if (cfg.has("experiment.reference_seed") &&
        cfg.get_u64("experiment.reference_seed", ws.seed) != ws.seed)
        fail(error_kind::config,
             "weak-strong: coarse and reference runs must share the initial seed");
    ws.spectral_decay = cfg.get_double("initial.spectral_decay", 4.0);
    ws.initial_ke = cfg.get_double("initial.kinetic_energy", 0.005);
    ws.mode_cutoff = static_cast<int>(cfg.get_long("initial.mode_cutoff", 5));
    ws.mu0 = mu0_from_config(cfg, ws.model);
    ws.rtol_r2 = cfg.get_double("experiment.rtol_r2", 1e-6);
    ws.threads = threads;
    ws.wallclock_cap_s = cfg.get_double("experiment.wallclock_cap_s", 300.0);
    ws.gronwall_stress_term = cfg.get_bool("gronwall.stress_term", false);

    std::map<std::string, std::string> resolved;
    resolved["resolved.mu0"] = fmt_double(ws.mu0);
    resolved["resolved.seed"] = std::to_string(ws.seed);
    resolved["resolved.threads"] = std::to_string(threads);
    echo_config(cfg, out_dir, resolved);

    weak_strong_result r = weak_strong_experiment(ws);

    std::string table = "N,sup_E,ratio_vs_previous\n";
    for (std::size_t i = 0; i < r.sup_E.size(); ++i) {
        double ratio = (i == 0) ? std::nan("") : r.sup_E[i - 1] / std::max(r.sup_E[i], 1e-300);
        table += std::to_string(r.n_list[i]) + "," + fmt_double(r.sup_E[i]) + "," +
                 fmt_double(ratio) + "\n";
        r.reports[i].write_csv(out_dir + "/relative_energy_N" + std::to_string(r.n_list[i]) +
                               ".csv");
    }
    write_text(out_dir + "/convergence_table.csv", table);

    bool certs_ok = true;
    for (const auto& led : r.ledgers)
        certs_ok = certs_ok && led.certificate_ok(cfg.get_double("experiment.cert_tol", 1e-6)) &&
                   led.gap_nonnegative_ok();

    ordered_json j;
    ordered_json sup;
    for (std::size_t i = 0; i < r.sup_E.size(); ++i)
        sup[std::to_string(r.n_list[i])] = r.sup_E[i];
    j["sup_E_by_N"] = sup;
    j["verdict"] = r.verdict;
    j["seeds"] = {ws.seed};
    j["wallclock"] = r.wallclock_s;
    j["min_ratio_per_doubling"] = r.min_ratio;
    j["monotone"] = r.monotone;
    j["envelope_ok"] = r.envelope_all;
    j["partial"] = r.partial;
    j["certificates_ok"] = certs_ok;
    j["worker_count"] = threads;
    write_text(out_dir + "/weak_strong_summary.json", j.dump(2) + "\n");

    experiment_result res;
    res.ok = true;
    res.verdict = r.verdict;
    res.certificate_ok = (r.verdict == "weak-strong-consistent") && certs_ok;
    if (r.partial) {
        res.ok = false;
        res.message = "wall-clock cap exceeded, partial bundle";
    }
    return res;
}

} // namespace drheo
