// Command-line front end. Talks to the solver exclusively through the C API
// in drheo.h, the same surface other language bindings would use.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "drheo.h"

namespace {

struct global_opts {
    std::string config_path;
    std::string out_dir = "out";
    std::string seed;
    int threads = 1;
};

int fail_with(const char* what) {
    std::fprintf(stderr, "error: %s: %s\n", what, drheo_last_error());
    return 1;
}

drheo_config* load_config(const global_opts& g) {
    drheo_config* cfg = nullptr;
    if (drheo_config_parse_file(g.config_path.c_str(), &cfg) != DRHEO_OK) return nullptr;
    if (!g.seed.empty()) drheo_config_set(cfg, "initial.seed", g.seed.c_str());
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral solver and certificate harness for implicitly "
                 "constituted incompressible fluids"};
    app.require_subcommand(1);

    global_opts g;
    app.add_option("--config", g.config_path, "experiment configuration file")->required();
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--seed", g.seed, "override initial.seed");
    app.add_option("--threads", g.threads, "worker threads for multi-run experiments");

    auto* simulate = app.add_subcommand("simulate", "step the configured system, write ledger and snapshots");
    auto* verify = app.add_subcommand("verify-rheology", "check the structural hypotheses of the configured law");
    auto* weak_strong = app.add_subcommand("weak-strong", "multi-resolution relative-energy experiment");
    auto* taylor_green = app.add_subcommand("taylor-green", "decaying-vortex benchmark against the exact solution");
    auto* conjugate = app.add_subcommand("conjugate-table", "tabulate the numeric Legendre transform");

    CLI11_PARSE(app, argc, argv);

    drheo_config* cfg = load_config(g);
    if (!cfg) return fail_with("config");
    int rc = 0;
    int cert_ok = 1;

    if (simulate->parsed()) {
        if (drheo_run_simulate(cfg, g.out_dir.c_str(), &cert_ok) != DRHEO_OK)
            rc = fail_with("simulate");
        else
            std::printf("simulate: done, certificates %s\n", cert_ok ? "ok" : "VIOLATED");
    } else if (verify->parsed()) {
        if (drheo_run_verify_rheology(cfg, g.out_dir.c_str(), &cert_ok) != DRHEO_OK)
            rc = fail_with("verify-rheology");
        else
            std::printf("verify-rheology: done, Fenchel-Young %s\n", cert_ok ? "ok" : "VIOLATED");
    } else if (weak_strong->parsed()) {
        if (drheo_run_weak_strong(cfg, g.out_dir.c_str(), g.threads, &cert_ok) != DRHEO_OK)
            rc = fail_with("weak-strong");
        else
            std::printf("weak-strong: done, verdict %s\n",
                        cert_ok ? "weak-strong-consistent" : "NOT CONSISTENT");
    } else if (taylor_green->parsed()) {
        double max_rel_err = 0;
        if (drheo_run_taylor_green(cfg, g.out_dir.c_str(), &cert_ok, &max_rel_err) != DRHEO_OK)
            rc = fail_with("taylor-green");
        else
            std::printf("taylor-green: done, max relative decay error %.3e, certificates %s\n",
                        max_rel_err, cert_ok ? "ok" : "VIOLATED");
    } else if (conjugate->parsed()) {
        if (drheo_run_conjugate_table(cfg, g.out_dir.c_str()) != DRHEO_OK)
            rc = fail_with("conjugate-table");
        else
            std::printf("conjugate-table: written\n");
    }

    drheo_config_free(cfg);
    if (rc != 0) return rc;
    return cert_ok ? 0 : 2;
}
