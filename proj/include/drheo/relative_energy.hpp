#ifndef DRHEO_RELATIVE_ENERGY_HPP
#define DRHEO_RELATIVE_ENERGY_HPP

#include <string>
#include <vector>

#include "drheo/certificates.hpp"
#include "drheo/driver.hpp"

namespace drheo {

// A reference "strong solution": either a manufactured closed form (forced
// Taylor-Green shape with time-dependent amplitude, exact for any smooth
// radial stress law) or the spectral interpolation of a finer resolved run.
class reference_solution {
  public:
    enum class source_kind { manufactured, fine_run };

    // a(t) = amp (0.8 + 0.2 cos(omega t)); d = 2
    static reference_solution manufactured(const rheology_model& model, double amp, double omega);
    static reference_solution fine_run(const rheology_model& model,
                                       std::vector<spectral_velocity> snapshots,
                                       const force_fn& force = {});

    source_kind source() const { return source_; }
    const rheology_model& model() const { return model_; }
    // forcing that makes the reference exact (empty for unforced fine runs)
    force_fn force() const;

    // velocity at time t on the requested grid (manufactured: sampled closed
    // form; fine_run: snapshot with matching time, truncated spectrally)
    spectral_velocity velocity_at(double t, const torus_grid& g, fft_workspace& fft) const;

    // time derivative of the reference velocity (closed form, or the
    // semi-discrete right side evaluated on the snapshot)
    cvector time_derivative_at(double t, const torus_grid& g, fft_workspace& fft) const;

    double amplitude(double t) const;      // manufactured a(t)
    double amplitude_rate(double t) const; // manufactured a'(t)

  private:
    source_kind source_ = source_kind::manufactured;
    rheology_model model_;
    double amp_ = 1.0, omega_ = 0.0;
    std::vector<spectral_velocity> snaps_;
    force_fn ext_force_;

    const spectral_velocity& snapshot_at(double t) const;
};

// (1/2) int |v - U|^2 plus half the defect trace; v is spectrally resampled
// onto U's grid, times must match.
double relative_energy(const spectral_velocity& v, const defect_estimate* defect,
                       const spectral_velocity& U);

struct r2_row {
    double time = 0;
    double E = 0;
    double envelope = 0;   // (E(0) + rtol KE0) exp(int 2 |grad U|_inf)
    double slack = 0;      // relative-energy inequality slack, >= 0 up to tolerance
    double conv_block = 0; // cumulative int [F(Dv) - S_hat:(Dv - DU) - F(DU)]
    double fy_block = 0;   // cumulative int [F(DU) + F*(S) - S:DU]
    double quad = 0;       // cumulative int (v-U)(x)(v-U):grad U
    double grad_inf = 0;   // |grad U(t)|_inf on the collocation grid
};

struct relative_energy_report {
    std::vector<r2_row> rows;
    double ke0 = 0;        // kinetic energy of the shared initial data
    double rtol = 1e-6;
    double sup_E = 0;
    bool bound_ok = true;     // slack >= -rtol (1 + ke0) at every time
    bool envelope_ok = true;  // E within the Gronwall envelope at every time
    bool convexity_ok = true; // pointwise convexity block above -1e-8 scale

    std::string csv_string() const; // time,E,gronwall_envelope,slack_r2,conv_block
    void write_csv(const std::string& path) const;
};

struct r2_options {
    double rtol = 1e-6;
    bool gronwall_stress_term = false; // adds a stress-Lipschitz allowance to c(t)
    const std::vector<defect_estimate>* defects = nullptr; // per snapshot, optional
};

// Discrete evaluation of the relative energy inequality in its
// stress-centered regrouping between a coarse trajectory and a reference
// solution; all spatial quadrature on the reference grid.
relative_energy_report verify_r2(const std::vector<spectral_velocity>& coarse,
                                 const rheology_model& model, const reference_solution& ref,
                                 const torus_grid& analysis_grid, const r2_options& opts = {});

struct weak_strong_config {
    int d = 2;
    std::vector<int> coarse_n = {16, 32, 64};
    int reference_n = 128;
    double dealias_fraction = 2.0 / 3.0;
    rheology_model model = rheology_model::power_law(2, 1.0, 2.5, 0.1);
    double t_final = 0.5;
    double record_dt = 0.02;
    std::uint64_t seed = 7;
    double spectral_decay = 4.0;
    double initial_ke = 0.005;
    int mode_cutoff = 5;
    double mu0 = 0.0;
    double rtol_r2 = 1e-6;
    int threads = 1;
    double wallclock_cap_s = 300.0;
    bool gronwall_stress_term = false;
};

struct weak_strong_result {
    std::vector<int> n_list;
    std::vector<relative_energy_report> reports; // one per coarse N
    std::vector<double> sup_E;
    std::vector<energy_ledger> ledgers;  // coarse runs then reference
    bool monotone = false;               // sup_E strictly decreasing in N
    double min_ratio = 0.0;              // min over doublings of sup_E(N)/sup_E(2N)
    bool envelope_all = false;
    bool partial = false;                // wall-clock cap hit
    double wallclock_s = 0.0;
    std::string verdict;                 // "weak-strong-consistent" or "inconclusive"
};

// Coarse runs at the configured resolutions against the reference run from
// identical (band-limited, projected) initial data; reports merged in
// resolution order regardless of thread count.
weak_strong_result weak_strong_experiment(const weak_strong_config& cfg);

} // namespace drheo

#endif
