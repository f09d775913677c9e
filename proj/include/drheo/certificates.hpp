#ifndef DRHEO_CERTIFICATES_HPP
#define DRHEO_CERTIFICATES_HPP

#include <optional>
#include <string>
#include <vector>

#include "drheo/field.hpp"
#include "drheo/galerkin.hpp"
#include "drheo/rheology.hpp"

namespace drheo {

struct ledger_row {
    double time = 0;
    double kinetic = 0;
    double diss_F = 0;      // int F(Dv) dx
    double diss_Fstar = 0;  // int F*(S) dx
    double diss_SD = 0;     // int S : Dv dx
    double gap = 0;         // diss_F + diss_Fstar - diss_SD
    double cum_diss = 0;    // cumulative int (F + F*) dt
    double budget_residual = 0; // kinetic + cum SD - kinetic(0) - cum work
    double cum_sd = 0;
    double cum_work = 0;
    double work_rate = 0;
};

// Per-step record of the energy inequality quantities with the
// Fenchel-Young dissipation split. Cumulative integrals use the RK4-stage
// Simpson increments when the stepper provides them (add_step_increment)
// and fall back to the trapezoid across records otherwise.
class energy_ledger {
  public:
    // stage-quadrature increments accumulated since the previous record
    void add_step_increment(const step_stats& s);

    // append one record computed from the current state; S must belong to
    // the same step as v
    void record(const rheology_model& model, const spectral_velocity& v, const stress_field& S,
                const cvector* force_spec, fft_workspace& fft);

    const std::vector<ledger_row>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }
    double initial_kinetic() const { return rows_.empty() ? 0.0 : rows_.front().kinetic; }

    // energy-inequality certificate with slack cert_tol_rel * kinetic(0)
    bool certificate_ok(double cert_tol_rel = 1e-6) const;
    double certificate_worst_slack() const; // min over rows of allowed - used
    bool gap_nonnegative_ok(double tol = 1e-10) const;
    double max_gap() const;
    double max_abs_budget_residual() const;

    void write_csv(const std::string& path) const;
    std::string csv_string() const;

  private:
    std::vector<ledger_row> rows_;
    double pend_sd_ = 0, pend_work_ = 0;
    bool has_pending_ = false;
    double cum_sd_ = 0, cum_work_ = 0, cum_gap_ = 0;
};

// Matrix-valued coarse-cell estimator of the Reynolds stress: per cell the
// second-moment defect of v over the cell, positive semidefinite by
// construction.
struct defect_estimate {
    int d = 2;
    int coarse_n = 0;
    std::vector<sym_tensor> cells; // coarse_n^d entries, row-major cells
    double min_eigenvalue = 0.0;   // over all cells
    double trace_total = 0.0;      // int trace of the cell field

    std::string csv_string() const;
    void write_csv(const std::string& path) const;
};

// Cell average of v (x) v minus the tensor square of the cell-averaged v,
// on coarse_n^d cells; coarse_n must divide the grid size.
defect_estimate estimate_defect(const spectral_velocity& v_fine, int coarse_n,
                                fft_workspace& fft);

// Same estimator applied to the spectral tail of v above the band a
// coarse_n grid retains: the resolved part of v contributes nothing, so the
// estimate vanishes for well-resolved fields. Used by the regularity
// diagnostic as the single-run defect proxy.
defect_estimate estimate_tail_defect(const spectral_velocity& v, int coarse_n,
                                     fft_workspace& fft);

struct weak_form_residual {
    int test_cutoff = 0; // integer modes per axis
    double incompressibility_residual = 0.0;
    double momentum_residual = 0.0;
};

struct trajectory_view {
    const rheology_model* model = nullptr;
    const std::vector<spectral_velocity>* snapshots = nullptr;
    force_fn force; // may be empty
    const std::vector<defect_estimate>* defects = nullptr; // per snapshot, optional
};

// Integral identities of the dissipative-solution definition evaluated
// against every divergence-free Fourier mode with |m|_inf <= cutoff; time
// integrals by the trapezoid over the snapshot times.
weak_form_residual weak_residuals(const trajectory_view& traj, int cutoff, fft_workspace& fft);

struct regularity_verdict {
    bool strong_consistent = false;
    double budget_gap = 0.0;   // max |budget_residual| / (1 + kinetic(0))
    double defect_trace = 0.0; // max defect trace   / (1 + kinetic(0))
    double reg_tol = 1e-6;
};

// Saturation check of the energy balance: a resolved run has both the budget
// residual and the tail-defect trace at the quadrature floor.
regularity_verdict regularity_diagnostic(const energy_ledger& ledger,
                                         const std::vector<defect_estimate>& defect_series,
                                         double reg_tol = 1e-6);

} // namespace drheo

#endif
