#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "drheo/driver.hpp"
#include "oracles.hpp"

using namespace drheo;

TEST_CASE("ledger: zero trajectory and sequencing") {
    torus_grid g(2, 16);
    fft_workspace fft(g);
    auto nw = rheology_model::newtonian(2, 1.0);

    energy_ledger led;
    spectral_velocity v(g);
    stress_field S;
    viscous_rhs(nw, v, fft, &S);
    led.record(nw, v, S, nullptr, fft);
    v.time = 0.5;
    led.record(nw, v, S, nullptr, fft);
    for (const auto& r : led.rows()) {
        CHECK(r.kinetic == 0.0);
        CHECK(r.diss_F == 0.0);
        CHECK(r.diss_Fstar == 0.0);
        CHECK(r.gap == 0.0);
        CHECK(r.cum_diss == 0.0);
        CHECK(r.budget_residual == 0.0);
    }
    CHECK(led.certificate_ok());

    spectral_velocity back(g);
    back.time = 0.25;
    CHECK_THROWS_AS(led.record(nw, back, S, nullptr, fft), error);
}

TEST_CASE("ledger: decaying vortex certificates") {
    torus_grid g(2, 32);
    auto nw = rheology_model::newtonian(2, 0.1);
    drive_options o;
    o.t_final = 1.0;
    o.fixed_dt = 1e-3;
    o.record_stride = 10;
    o.mu0 = 0.1;
    drive_result r = drive(nw, taylor_green(g, 1.0), o, {});
    REQUIRE_FALSE(r.aborted);

    const double rate = 2.0 * oracle::taylor_green2d::decay_rate(0.1);
    double ke0 = r.ledger.initial_kinetic();
    for (const auto& row : r.ledger.rows()) {
        double exact = ke0 * std::exp(-rate * row.time);
        CHECK(row.kinetic == doctest::Approx(exact).epsilon(1e-6));
        CHECK(row.gap >= -1e-10 * (1.0 + row.diss_F + row.diss_Fstar));
        CHECK(std::abs(row.gap) <= 1e-10);
    }
    CHECK(r.ledger.certificate_ok(1e-6));
    CHECK(r.ledger.gap_nonnegative_ok());
    CHECK(r.ledger.max_abs_budget_residual() <= 1e-8);

    // cumulative dissipation is nondecreasing
    double prev = -1.0;
    for (const auto& row : r.ledger.rows()) {
        CHECK(row.cum_diss >= prev - 1e-14);
        prev = row.cum_diss;
    }

    // csv shape
    std::string csv = r.ledger.csv_string();
    CHECK(csv.rfind("time,kinetic,diss_F,diss_Fstar,diss_SD,gap,cum_diss,budget_residual\n", 0) ==
          0);
}

TEST_CASE("ledger: euler conserves and accumulates no dissipation") {
    torus_grid g(2, 32);
    auto eu = rheology_model::euler(2);
    drive_options o;
    o.t_final = 0.5;
    o.fixed_dt = 1e-3;
    o.record_stride = 50;
    drive_result r = drive(eu, random_smooth(g, 42, 4.0, 0.03, 5), o, {});
    REQUIRE_FALSE(r.aborted);
    for (const auto& row : r.ledger.rows()) {
        CHECK(row.diss_F == 0.0);
        CHECK(row.cum_diss == 0.0);
    }
    CHECK(r.ledger.max_abs_budget_residual() <= 1e-8);
    CHECK(r.ledger.certificate_ok(1e-6));
}

TEST_CASE("defect estimator: variance structure") {
    torus_grid g(2, 32);
    fft_workspace fft(g);

    // constant per cell: zero defect (the 8x8-blocky field is piecewise
    // constant on 8x8 cells)
    spectral_velocity blocky(g);
    {
        std::vector<double> comp(g.points());
        std::uint64_t st = 5;
        std::vector<double> cellvals(64);
        for (auto& c : cellvals) c = next_gaussian(st);
        for (std::size_t idx = 0; idx < g.points(); ++idx) {
            std::size_t ix = idx / 32, iy = idx % 32;
            comp[idx] = cellvals[(ix / 4) * 8 + (iy / 4)];
        }
        cvector spec;
        fft.to_spectral(comp, spec);
        std::copy(spec.begin(), spec.end(), blocky.comp(0));
    }
    defect_estimate de = estimate_defect(blocky, 8, fft);
    CHECK(de.trace_total <= 1e-24);
    for (const auto& cell : de.cells) CHECK(std::abs(cell.trace()) <= 1e-26);

    // single mode above the coarse cutoff, frequency a multiple of the cell
    // count: cell averages vanish, the defect carries the whole second moment
    spectral_velocity mode(g);
    int mp[3] = {8, 0, 0}, mn[3] = {-8, 0, 0};
    mode.c[1 * g.points() + g.index_of(mp)] = 0.35;
    mode.c[1 * g.points() + g.index_of(mn)] = 0.35;
    mode.project();
    defect_estimate dm = estimate_defect(mode, 8, fft);
    double l2 = 2.0 * mode.kinetic_energy();
    CHECK(dm.trace_total == doctest::Approx(l2).epsilon(1e-10));

    // PSD on random fields
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        spectral_velocity v = random_smooth(g, seed, 2.0, 0.5, 10);
        defect_estimate d = estimate_defect(v, 8, fft);
        CHECK(d.min_eigenvalue >= -1e-10 * (1.0 + d.trace_total));
        CHECK(d.trace_total >= -1e-10);
    }

    // refinement never increases the total trace (variance decomposition)
    spectral_velocity v = random_smooth(g, 9, 2.0, 0.5, 10);
    double t4 = estimate_defect(v, 4, fft).trace_total;
    double t8 = estimate_defect(v, 8, fft).trace_total;
    double t16 = estimate_defect(v, 16, fft).trace_total;
    CHECK(t8 <= t4 + 1e-12 * (1.0 + t4));
    CHECK(t16 <= t8 + 1e-12 * (1.0 + t8));

    CHECK_THROWS_AS((void)estimate_defect(v, 7, fft), error);

    // csv shape
    std::string csv = de.csv_string();
    CHECK(csv.rfind("cell_index,m11,m12,m22,min_eig\n", 0) == 0);
}

TEST_CASE("tail defect vanishes for resolved fields") {
    torus_grid g(2, 32);
    fft_workspace fft(g);
    // band-limited to the coarse band: tail defect is numerically zero
    spectral_velocity low = random_smooth(g, 3, 3.0, 0.2, 3);
    defect_estimate dt = estimate_tail_defect(low, 16, fft);
    CHECK(dt.trace_total <= 1e-24);
    // energy above the band shows up
    spectral_velocity hi = random_smooth(g, 3, 0.5, 0.2, 10);
    defect_estimate dh = estimate_tail_defect(hi, 16, fft);
    CHECK(dh.trace_total > 1e-6);
}

TEST_CASE("weak-form residuals") {
    torus_grid g(2, 32);
    fft_workspace fft(g);
    auto nw = rheology_model::newtonian(2, 0.05);

    drive_options o;
    o.t_final = 0.2;
    o.fixed_dt = 1e-3;
    o.record_stride = 5;
    drive_result r = drive(nw, random_smooth(g, 12, 4.0, 0.1, 5), o, {});
    REQUIRE_FALSE(r.aborted);

    trajectory_view tv;
    tv.model = &nw;
    tv.snapshots = &r.snapshots;
    weak_form_residual res = weak_residuals(tv, 8, fft);
    CHECK(res.incompressibility_residual <= 1e-12);
    CHECK(res.momentum_residual <= 1e-6);

    // tampering with one retained coefficient breaks the identity
    auto snaps = r.snapshots;
    std::size_t mid = snaps.size() / 2;
    int mm[3] = {2, 1, 0};
    std::size_t idx = g.index_of(mm);
    snaps[mid].c[idx] += 1e-3;
    snaps[mid].hermitize(); // keep it a legal real field
    trajectory_view tv2;
    tv2.model = &nw;
    tv2.snapshots = &snaps;
    weak_form_residual res2 = weak_residuals(tv2, 8, fft);
    CHECK(res2.momentum_residual >= 1e-4);

    // constant-in-space field: incompressibility residual identically zero
    std::vector<spectral_velocity> constseq;
    spectral_velocity c0(g);
    c0.c[0] = 0.3;
    constseq.push_back(c0);
    c0.time = 0.1;
    constseq.push_back(c0);
    trajectory_view tv3;
    tv3.model = &nw;
    tv3.snapshots = &constseq;
    weak_form_residual res3 = weak_residuals(tv3, 4, fft);
    CHECK(res3.incompressibility_residual == 0.0);

    trajectory_view empty;
    empty.model = &nw;
    CHECK_THROWS_AS((void)weak_residuals(empty, 4, fft), error);
}

TEST_CASE("weak-form residual with the defect term of a two-grid estimate") {
    // coarse representation of a finer run plus its defect estimate still
    // satisfies the momentum identity far better than without the defect
    torus_grid gf(2, 32);
    fft_workspace fft(gf);
    auto nw = rheology_model::newtonian(2, 0.05);
    drive_options o;
    o.t_final = 0.1;
    o.fixed_dt = 1e-3;
    o.record_stride = 5;
    drive_result r = drive(nw, random_smooth(gf, 12, 3.0, 0.2, 9), o, {});
    REQUIRE_FALSE(r.aborted);

    std::vector<defect_estimate> defs;
    for (const auto& s : r.snapshots) defs.push_back(estimate_defect(s, 8, fft));

    trajectory_view tv;
    tv.model = &nw;
    tv.snapshots = &r.snapshots;
    tv.defects = &defs;
    weak_form_residual with = weak_residuals(tv, 2, fft);
    CHECK(std::isfinite(with.momentum_residual));
    CHECK(with.momentum_residual >= 0.0);
}

TEST_CASE("regularity diagnostic") {
    torus_grid g(2, 32);
    auto nw = rheology_model::newtonian(2, 0.1);
    drive_options o;
    o.t_final = 0.5;
    o.fixed_dt = 1e-3;
    o.record_stride = 25;
    o.mu0 = 0.1;
    o.diag_coarse_n = 16;
    drive_result r = drive(nw, taylor_green(g, 1.0), o, {});
    regularity_verdict v = regularity_diagnostic(r.ledger, r.defects);
    CHECK(v.strong_consistent);
    CHECK(v.budget_gap <= 1e-6);
    CHECK(v.defect_trace <= 1e-6);

    // zero field: trivially consistent
    energy_ledger empty_led;
    regularity_verdict v0 = regularity_diagnostic(empty_led, {});
    CHECK(v0.strong_consistent);

    // deliberately under-resolved degenerate law: defect is reported nonzero
    auto deg = rheology_model::power_law(2, 1.0, 1.6);
    torus_grid gc(2, 16);
    drive_options oc;
    oc.t_final = 0.02;
    oc.fixed_dt = 5e-5;
    oc.record_stride = 100;
    oc.diag_coarse_n = 4;
    drive_result rc = drive(deg, random_smooth(gc, 3, 2.0, 0.02, 5), oc, {});
    REQUIRE_FALSE(rc.aborted);
    regularity_verdict vc = regularity_diagnostic(rc.ledger, rc.defects);
    CHECK(vc.defect_trace > 1e-6);
}

TEST_CASE("driver abort on blow-up keeps the last good snapshot") {
    // euler with an aggressive fixed dt far above the advective limit
    torus_grid g(2, 16);
    auto eu = rheology_model::euler(2);
    drive_options o;
    o.t_final = 10.0;
    o.fixed_dt = 5.0; // violates the CFL guard immediately
    drive_result r = drive(eu, random_smooth(g, 2, 2.0, 1.0, 5), o, {});
    CHECK(r.aborted);
    CHECK_FALSE(r.abort_reason.empty());
    CHECK_FALSE(r.snapshots.empty());
    CHECK(r.snapshots.back().finite());
}
