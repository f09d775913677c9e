// The C surface exercised the way an external binding would use it.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "drheo.h"

namespace {

std::string scratch_dir(const std::string& leaf) {
    auto dir = std::filesystem::temp_directory_path() / "drheo_capi" / leaf;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

} // namespace

TEST_CASE("config handles") {
    drheo_config* cfg = nullptr;
    REQUIRE(drheo_config_parse_string("grid.n = 16\nrheology.kind = newtonian\nrheology.mu = 2\n",
                                      &cfg) == DRHEO_OK);
    char buf[64];
    CHECK(drheo_config_get(cfg, "grid.n", buf, sizeof buf) == DRHEO_OK);
    CHECK(std::string(buf) == "16");
    CHECK(drheo_config_set(cfg, "grid.n", "32") == DRHEO_OK);
    CHECK(drheo_config_get(cfg, "grid.n", buf, sizeof buf) == DRHEO_OK);
    CHECK(std::string(buf) == "32");
    CHECK(drheo_config_get(cfg, "absent", buf, sizeof buf) == DRHEO_ERR_CONFIG);
    CHECK(std::strlen(drheo_last_error()) > 0);
    drheo_config_free(cfg);

    drheo_config* bad = nullptr;
    CHECK(drheo_config_parse_string("not a config", &bad) == DRHEO_ERR_CONFIG);
    CHECK(drheo_config_parse_file("/nonexistent.cfg", &bad) == DRHEO_ERR_IO);
    CHECK(drheo_config_parse_string(nullptr, &bad) == DRHEO_ERR_INVALID_ARGUMENT);
}

TEST_CASE("model evaluations through the C API") {
    drheo_config* cfg = nullptr;
    REQUIRE(drheo_config_parse_string(
                "grid.d = 2\nrheology.kind = power_law\nrheology.p = 3\nrheology.mu2 = 1\n",
                &cfg) == DRHEO_OK);
    drheo_model* model = nullptr;
    REQUIRE(drheo_model_create(cfg, &model) == DRHEO_OK);

    char kind[32];
    CHECK(drheo_model_kind(model, kind, sizeof kind) == DRHEO_OK);
    CHECK(std::string(kind) == "power_law");

    const double s2 = std::sqrt(2.0);
    double D[4] = {s2, 0.0, 0.0, s2}; // |D| = 2
    double out = 0;
    CHECK(drheo_model_eval_f(model, D, 2, &out) == DRHEO_OK);
    CHECK(out == doctest::Approx(8.0 / 3.0).epsilon(1e-12));

    double S[4];
    CHECK(drheo_model_stress(model, D, 2, S) == DRHEO_OK);
    CHECK(S[0] == doctest::Approx(2.0 * s2).epsilon(1e-13));

    CHECK(drheo_model_eval_fstar(model, S, 2, &out) == DRHEO_OK);
    CHECK(out == doctest::Approx(16.0 / 3.0).epsilon(1e-10));

    CHECK(drheo_model_gap(model, S, D, 2, &out) == DRHEO_OK);
    CHECK(std::abs(out) <= 1e-10);

    CHECK(drheo_model_asymptotic(model, D, 2, 1e4, &out) == DRHEO_OK);
    CHECK(std::isinf(out));

    CHECK(drheo_model_eval_f(model, D, 3, &out) == DRHEO_ERR_INVALID_ARGUMENT);

    drheo_hypothesis_report rep;
    CHECK(drheo_model_validate_hypotheses(model, 150, 1, &rep) == DRHEO_OK);
    CHECK(rep.all_ok == 1);
    drheo_model_free(model);
    drheo_config_free(cfg);

    // euler through the same path: conjugate diverges, DD5 fails
    REQUIRE(drheo_config_parse_string("grid.d = 2\nrheology.kind = euler\n", &cfg) == DRHEO_OK);
    REQUIRE(drheo_model_create(cfg, &model) == DRHEO_OK);
    double S1[4] = {0.7, 0.0, 0.0, -0.7};
    CHECK(drheo_model_eval_fstar(model, S1, 2, &out) == DRHEO_OK);
    CHECK(std::isinf(out));
    CHECK(drheo_model_validate_hypotheses(model, 150, 1, &rep) == DRHEO_OK);
    CHECK(rep.dd5_ok == 0);
    CHECK(rep.f_star_ball_radius == 0.0);
    drheo_model_free(model);
    drheo_config_free(cfg);
}

TEST_CASE("simulation handle: advance, energy, snapshot, ledger") {
    drheo_config* cfg = nullptr;
    REQUIRE(drheo_config_parse_string(
                "grid.d = 2\ngrid.n = 32\nrheology.kind = newtonian\nrheology.mu = 0.1\n"
                "time.dt = 1e-3\ntime.mu0 = auto\ninitial.kind = taylor_green\n",
                &cfg) == DRHEO_OK);
    drheo_sim* sim = nullptr;
    REQUIRE(drheo_sim_create(cfg, &sim) == DRHEO_OK);

    double ke0 = 0, ke1 = 0, t = 0;
    CHECK(drheo_sim_kinetic_energy(sim, &ke0) == DRHEO_OK);
    CHECK(ke0 == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(drheo_sim_advance(sim, 0.25) == DRHEO_OK);
    CHECK(drheo_sim_time(sim, &t) == DRHEO_OK);
    CHECK(t == doctest::Approx(0.25));
    CHECK(drheo_sim_kinetic_energy(sim, &ke1) == DRHEO_OK);
    const double pi = 3.141592653589793238462643383279502884;
    CHECK(ke1 == doctest::Approx(std::exp(-2.0 * 0.1 * pi * pi * 0.25)).epsilon(1e-6));
    CHECK(drheo_sim_advance(sim, 0.1) == DRHEO_ERR_INVALID_ARGUMENT); // time must not decrease

    std::string dir = scratch_dir("sim");
    CHECK(drheo_sim_write_snapshot(sim, (dir + "/state.bin").c_str()) == DRHEO_OK);
    CHECK(drheo_sim_write_ledger(sim, (dir + "/ledger.csv").c_str()) == DRHEO_OK);
    CHECK(std::filesystem::file_size(dir + "/state.bin") == 24 + 32 * 32 * 2 * 16);
    drheo_sim_free(sim);
    drheo_config_free(cfg);
}

TEST_CASE("experiment entry points") {
    drheo_config* cfg = nullptr;
    REQUIRE(drheo_config_parse_string(
                "grid.d = 2\ngrid.n = 32\n"
                "rheology.kind = power_law\nrheology.p = 2.5\nrheology.mu1 = 0.1\n"
                "time.t_final = 0.02\ntime.record_stride = 5\n"
                "initial.kind = seeded_random_smooth\ninitial.seed = 4\n"
                "initial.kinetic_energy = 0.01\n",
                &cfg) == DRHEO_OK);
    int cert = 0;
    std::string dir = scratch_dir("runs");
    CHECK(drheo_run_simulate(cfg, (dir + "/sim").c_str(), &cert) == DRHEO_OK);
    CHECK(cert == 1);
    drheo_config_free(cfg);

    REQUIRE(drheo_config_parse_string("rheology.kind = power_law\nrheology.p = 3\n"
                                      "experiment.samples = 150\n",
                                      &cfg) == DRHEO_OK);
    CHECK(drheo_run_verify_rheology(cfg, (dir + "/vr").c_str(), &cert) == DRHEO_OK);
    CHECK(cert == 1);
    CHECK(drheo_run_conjugate_table(cfg, (dir + "/ct").c_str()) == DRHEO_OK);
    drheo_config_free(cfg);

    REQUIRE(drheo_config_parse_string(
                "grid.d = 2\ngrid.n = 32\nrheology.kind = newtonian\nrheology.mu = 0.1\n"
                "time.t_final = 0.1\ntime.dt = 1e-3\ntime.record_stride = 20\n",
                &cfg) == DRHEO_OK);
    double err = 0;
    CHECK(drheo_run_taylor_green(cfg, (dir + "/tg").c_str(), &cert, &err) == DRHEO_OK);
    CHECK(cert == 1);
    CHECK(err <= 1e-6);
    drheo_config_free(cfg);
}
