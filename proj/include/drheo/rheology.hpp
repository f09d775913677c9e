#ifndef DRHEO_RHEOLOGY_HPP
#define DRHEO_RHEOLOGY_HPP

#include <array>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drheo/sym_tensor.hpp"

namespace drheo {

enum class rheology_kind {
    newtonian,
    power_law,
    carreau,
    bingham_regularized,
    anisotropic_wrap,
    euler,
};

std::string to_string(rheology_kind k);
rheology_kind rheology_kind_from_string(const std::string& s);

enum class conjugate_mode { closed_form, radial_numeric };

inline constexpr double inf = std::numeric_limits<double>::infinity();

// Convex dissipation potential F together with its conjugate F*, the
// subdifferential stress selection and the structural checks on growth.
//
// All built-in isotropic laws are radial: F(D) = f(|D|) with f convex,
// f(0) = 0, where |.| is the Frobenius norm. The stress selection is then
// S = mu(|D|) D with mu(s) = f'(s)/s. The anisotropic wrap composes a base
// isotropic potential with a linear map L on symmetric tensors,
// F_L(D) = F(L D); euler is the wrap with L = 0.
class rheology_model {
  public:
    // -- constructors ------------------------------------------------------
    static rheology_model newtonian(int d, double mu);
    // generalized power family mu(s) = (mu1 + mu2 s^2)^((p-2)/2); mu1 = 0 is
    // the pure power law
    static rheology_model power_law(int d, double mu2, double p, double mu1 = 0.0);
    // same viscosity family but F is evaluated by adaptive quadrature
    static rheology_model carreau(int d, double mu1, double mu2, double p);
    static rheology_model bingham_regularized(int d, double mu, double tau0, double eps_reg);
    // F_L(D) = F_base(L D); L given as a d^2 x d^2 matrix acting on row-major
    // vectorized tensors and required to map symmetric to symmetric
    static rheology_model anisotropic_wrap(rheology_model base, const Eigen::MatrixXd& L);
    static rheology_model euler(int d);

    // Optional Moreau-Yosida smoothing of the radial profile (solver aid for
    // degenerate p < 2 laws). eps = 0 disables.
    rheology_model with_moreau_yosida(double eps) const;

    // -- metadata ----------------------------------------------------------
    rheology_kind kind() const { return kind_; }
    int dim() const { return d_; }
    bool validated() const { return validated_; }
    conjugate_mode conj_mode() const { return conj_mode_; }
    double growth_exponent() const { return growth_exponent_; }
    double param_mu() const { return mu_; }
    double param_mu1() const { return mu1_; }
    double param_mu2() const { return mu2_; }
    double param_p() const { return p_; }
    double param_tau0() const { return tau0_; }
    double param_eps_reg() const { return eps_reg_; }
    double moreau_yosida_eps() const { return my_eps_; }
    const rheology_model* base() const { return base_.get(); }
    const Eigen::MatrixXd& wrap_map() const { return L_; }

    // Parameter sanity; throws error_kind::config on violation and marks the
    // model usable. Called by every factory.
    void validate();
    void require_validated() const;

    // -- radial profile (isotropic models; wrap delegates to its base) ------
    double mu_of(double s) const;      // mu(s); may be +inf at s = 0 for p < 2
    double dmu_ds(double s) const;     // d mu / d s
    double f_radial(double r) const;   // F along a unit direction
    double f_prime(double r) const;    // = mu(r) r, continuous at 0
    double f_second(double r) const;   // d/dr f'(r)
    double fstar_radial(double sigma) const;          // dispatches on conj_mode
    double fstar_radial_numeric(double sigma) const;  // golden section + Newton polish
    bool fstar_closed_available() const;
    double fstar_radial_closed(double sigma) const;

    // Largest explicit-step viscosity the law can exhibit at strain rate s,
    // clamped away from the degenerate s -> 0 blow-up of p < 2 power laws.
    double effective_viscosity(double s, double s_floor) const;

  private:
    rheology_kind kind_ = rheology_kind::newtonian;
    int d_ = 2;
    double mu_ = 1.0;
    double mu1_ = 0.0, mu2_ = 1.0, p_ = 2.0;
    double tau0_ = 0.0, eps_reg_ = 1e-3;
    double my_eps_ = 0.0;
    double growth_exponent_ = 2.0;
    conjugate_mode conj_mode_ = conjugate_mode::closed_form;
    bool validated_ = false;

    std::shared_ptr<const rheology_model> base_; // anisotropic_wrap / euler only
    Eigen::MatrixXd L_;                          // d^2 x d^2
    Eigen::MatrixXd pinv_LT_;                    // (L^t)^+, precomputed
    double L_norm_ = 0.0;                        // operator norm of L

    // Moreau-Yosida helpers on the raw (unsmoothed) profile.
    double raw_f(double r) const;
    double raw_fprime(double r) const;
    double raw_fsecond(double r) const;
    double my_prox(double r) const;

    friend double eval_F(const rheology_model&, const sym_tensor&);
    friend double eval_F_star(const rheology_model&, const sym_tensor&);
    friend sym_tensor stress_from_D(const rheology_model&, const sym_tensor&);
    friend sym_tensor apply_wrap_map(const rheology_model&, const sym_tensor&, bool);
};

// -- operations ------------------------------------------------------------

// Dissipation potential density F(D) >= 0, F(0) = 0.
double eval_F(const rheology_model& model, const sym_tensor& D);

// Legendre-Fenchel conjugate F*(S); +inf signals a divergent supremum (a
// value, not an error: the euler wrap has F* = indicator of {0}).
double eval_F_star(const rheology_model& model, const sym_tensor& S);

// Radial subdifferential selection mu(|D|) D; minimal-norm element 0 where
// the profile is non-smooth at the origin.
sym_tensor stress_from_D(const rheology_model& model, const sym_tensor& D);

// F(D) + F*(S) - S:D  (>= 0, and = 0 exactly on the subdifferential graph).
double fenchel_young_gap(const rheology_model& model, const sym_tensor& S, const sym_tensor& D);

// Richardson-extrapolated estimate of lim_{s->inf} F(sD)/s sampled at
// s_max/4, s_max/2, s_max; +inf when the sequence grows superlinearly.
double asymptotic_F(const rheology_model& model, const sym_tensor& D, double s_max);

struct hypothesis_report {
    bool fenchel_young_ok = false;
    std::array<double, 4> conjugate_superlinear_slope_at{}; // F*(S)/|S| at |S| = 10^k, k = 1..4
    bool f_domain_full = false;
    double f_star_ball_radius = 0.0;       // largest sampled radius with F* finite on the ball
    double f_infinity_linear_bound = 0.0;  // sampled sup of F_inf(D)/|D| over its domain
    bool dd4_ok = false;                   // conjugate superlinear
    bool dd5_ok = false;                   // dom F* contains a ball
    bool dd6_ok = false;                   // F at least linear at infinity
    bool dd7_ok = false;                   // F_inf linearly bounded on its domain
    bool all_ok = false;
};

hypothesis_report validate_hypotheses(const rheology_model& model, int samples,
                                      std::uint64_t seed = 0x5eed);

// Random symmetric tensor with i.i.d. Gaussian upper triangle, used by the
// hypothesis sampler and the property tests.
sym_tensor random_sym_tensor(int d, std::uint64_t& state);

// Deterministic xorshift-based uniforms/gaussians (stable across platforms).
double next_uniform(std::uint64_t& state);   // [0, 1)
double next_gaussian(std::uint64_t& state);  // Box-Muller

} // namespace drheo

#endif
