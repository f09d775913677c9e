#ifndef DRHEO_DRIVER_HPP
#define DRHEO_DRIVER_HPP

#include <string>
#include <vector>

#include "drheo/certificates.hpp"
#include "drheo/galerkin.hpp"

namespace drheo {

struct drive_options {
    double t_final = 1.0;
    double fixed_dt = 0.0;     // <= 0: auto (0.5 * cfl, re-evaluated every 10 steps)
    int record_stride = 1;     // mode A: record every k-th step
    double record_dt = 0.0;    // mode B (> 0): records at exact multiples of record_dt
    double mu0 = 0.0;          // integrating-factor floor
    int diag_coarse_n = 0;     // > 0: tail-defect estimate at every record
    long max_steps = 50'000'000;
};

struct drive_result {
    std::vector<spectral_velocity> snapshots; // at record times (first = initial)
    energy_ledger ledger;
    std::vector<defect_estimate> defects; // when diag_coarse_n > 0
    long steps = 0;
    double min_dt = inf;
    bool aborted = false;       // NaN/stability abort; last good state kept
    std::string abort_reason;
};

// Steps the projected system to t_final recording ledger rows and snapshots.
// Deterministic for fixed inputs; time-aligned mode lands records on exact
// multiples of record_dt so multi-resolution runs share record times.
drive_result drive(const rheology_model& model, const spectral_velocity& v0,
                   const drive_options& opts, const force_fn& force = {});

} // namespace drheo

#endif
