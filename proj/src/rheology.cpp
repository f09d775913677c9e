#include "drheo/rheology.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace drheo {

namespace {

// matched absolute+relative tolerance used by the conjugate solvers
constexpr double kSolveTol = 1e-14;
constexpr double kRangeTol = 1e-10;

Eigen::VectorXd vectorize(const sym_tensor& t) {
    Eigen::VectorXd v(t.d * t.d);
    for (int i = 0; i < t.d; ++i)
        for (int j = 0; j < t.d; ++j) v(i * t.d + j) = t(i, j);
    return v;
}

sym_tensor devectorize(int d, const Eigen::VectorXd& v) {
    sym_tensor t(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) t.set(i, j, 0.5 * (v(i * d + j) + v(j * d + i)));
    return t;
}

// adaptive Simpson on [a, b] for the carreau profile integral
template <class Fn>
double adaptive_simpson(Fn&& f, double a, double b, double fa, double fm, double fb, double tol,
                        int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, tol / 2.0, depth - 1);
}

} // namespace

std::string to_string(rheology_kind k) {
    switch (k) {
        case rheology_kind::newtonian: return "newtonian";
        case rheology_kind::power_law: return "power_law";
        case rheology_kind::carreau: return "carreau";
        case rheology_kind::bingham_regularized: return "bingham_regularized";
        case rheology_kind::anisotropic_wrap: return "anisotropic_wrap";
        case rheology_kind::euler: return "euler";
    }
    return "?";
}

rheology_kind rheology_kind_from_string(const std::string& s) {
    if (s == "newtonian") return rheology_kind::newtonian;
    if (s == "power_law") return rheology_kind::power_law;
    if (s == "carreau") return rheology_kind::carreau;
    if (s == "bingham_regularized") return rheology_kind::bingham_regularized;
    if (s == "anisotropic_wrap") return rheology_kind::anisotropic_wrap;
    if (s == "euler") return rheology_kind::euler;
    fail(error_kind::config, "unknown rheology kind: " + s);
}

// -- factories ---------------------------------------------------------------

rheology_model rheology_model::newtonian(int d, double mu) {
    rheology_model m;
    m.kind_ = rheology_kind::newtonian;
    m.d_ = d;
    m.mu_ = mu;
    m.growth_exponent_ = 2.0;
    m.conj_mode_ = conjugate_mode::closed_form;
    m.validate();
    return m;
}

rheology_model rheology_model::power_law(int d, double mu2, double p, double mu1) {
    rheology_model m;
    m.kind_ = rheology_kind::power_law;
    m.d_ = d;
    m.mu1_ = mu1;
    m.mu2_ = mu2;
    m.p_ = p;
    m.growth_exponent_ = p;
    m.conj_mode_ = (mu1 == 0.0) ? conjugate_mode::closed_form : conjugate_mode::radial_numeric;
    m.validate();
    return m;
}

rheology_model rheology_model::carreau(int d, double mu1, double mu2, double p) {
    rheology_model m;
    m.kind_ = rheology_kind::carreau;
    m.d_ = d;
    m.mu1_ = mu1;
    m.mu2_ = mu2;
    m.p_ = p;
    m.growth_exponent_ = p;
    m.conj_mode_ = conjugate_mode::radial_numeric;
    m.validate();
    return m;
}

rheology_model rheology_model::bingham_regularized(int d, double mu, double tau0, double eps_reg) {
    rheology_model m;
    m.kind_ = rheology_kind::bingham_regularized;
    m.d_ = d;
    m.mu_ = mu;
    m.tau0_ = tau0;
    m.eps_reg_ = eps_reg;
    m.growth_exponent_ = (mu > 0.0) ? 2.0 : 1.0;
    m.conj_mode_ = conjugate_mode::radial_numeric;
    m.validate();
    return m;
}

rheology_model rheology_model::anisotropic_wrap(rheology_model base, const Eigen::MatrixXd& L) {
    if (base.kind_ == rheology_kind::anisotropic_wrap || base.kind_ == rheology_kind::euler)
        fail(error_kind::config, "anisotropic_wrap: base must be isotropic");
    rheology_model m;
    m.kind_ = rheology_kind::anisotropic_wrap;
    m.d_ = base.d_;
    m.base_ = std::make_shared<rheology_model>(std::move(base));
    m.L_ = L;
    m.growth_exponent_ = m.base_->growth_exponent_;
    m.conj_mode_ = conjugate_mode::radial_numeric;
    m.validate();
    return m;
}

rheology_model rheology_model::euler(int d) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d * d, d * d);
    rheology_model m = anisotropic_wrap(newtonian(d, 1.0), L);
    m.kind_ = rheology_kind::euler;
    return m;
}

rheology_model rheology_model::with_moreau_yosida(double eps) const {
    require_validated();
    if (eps < 0.0) fail(error_kind::config, "moreau_yosida eps must be >= 0");
    if (kind_ == rheology_kind::anisotropic_wrap || kind_ == rheology_kind::euler)
        fail(error_kind::config, "moreau_yosida smoothing applies to isotropic models");
    rheology_model m = *this;
    m.my_eps_ = eps;
    return m;
}

void rheology_model::validate() {
    if (d_ != 2 && d_ != 3) fail(error_kind::config, "rheology: d must be 2 or 3");
    switch (kind_) {
        case rheology_kind::newtonian:
            if (!(mu_ > 0.0) || !std::isfinite(mu_))
                fail(error_kind::config, "newtonian: mu must be positive");
            break;
        case rheology_kind::power_law:
        case rheology_kind::carreau:
            if (mu1_ < 0.0 || mu2_ < 0.0) fail(error_kind::config, "power family: mu1, mu2 >= 0");
            if (!(p_ > 1.0)) fail(error_kind::config, "power family: p > 1 required");
            if (mu1_ == 0.0 && !(mu2_ > 0.0))
                fail(error_kind::config, "power family: mu2 > 0 required when mu1 = 0");
            if (mu1_ == 0.0 && mu2_ == 0.0) fail(error_kind::config, "power family: degenerate law");
            break;
        case rheology_kind::bingham_regularized:
            if (mu_ < 0.0 || tau0_ < 0.0) fail(error_kind::config, "bingham: mu, tau0 >= 0");
            if (!(eps_reg_ > 0.0)) fail(error_kind::config, "bingham: eps_reg > 0 required");
            if (mu_ == 0.0 && tau0_ == 0.0) fail(error_kind::config, "bingham: degenerate law");
            break;
        case rheology_kind::anisotropic_wrap:
        case rheology_kind::euler: {
            const int n = d_ * d_;
            if (L_.rows() != n || L_.cols() != n)
                fail(error_kind::config, "wrap map must be d^2 x d^2");
            if (!base_ || !base_->validated_) fail(error_kind::config, "wrap base not validated");
            // L must map symmetric tensors to symmetric tensors
            std::uint64_t st = 1234567;
            for (int trial = 0; trial < 8; ++trial) {
                sym_tensor D = random_sym_tensor(d_, st);
                Eigen::VectorXd w = L_ * vectorize(D);
                for (int i = 0; i < d_; ++i)
                    for (int j = i + 1; j < d_; ++j)
                        if (std::abs(w(i * d_ + j) - w(j * d_ + i)) >
                            1e-12 * (1.0 + w.cwiseAbs().maxCoeff()))
                            fail(error_kind::config, "wrap map does not preserve symmetry");
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(L_.transpose(),
                                                  Eigen::ComputeThinU | Eigen::ComputeThinV);
            svd.setThreshold(1e-12);
            Eigen::VectorXd sv = svd.singularValues();
            Eigen::VectorXd inv_sv = sv;
            double smax = sv.size() ? sv(0) : 0.0;
            for (int i = 0; i < sv.size(); ++i)
                inv_sv(i) = (sv(i) > 1e-12 * std::max(1.0, smax)) ? 1.0 / sv(i) : 0.0;
            pinv_LT_ = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
            L_norm_ = smax;
            break;
        }
    }
    validated_ = true;
}

void rheology_model::require_validated() const {
    if (!validated_) fail(error_kind::config, "rheology model not validated");
}

// -- raw radial profile ------------------------------------------------------

double rheology_model::mu_of(double s) const {
    switch (kind_) {
        case rheology_kind::newtonian: return mu_;
        case rheology_kind::power_law:
        case rheology_kind::carreau: {
            double z = mu1_ + mu2_ * s * s;
            if (z == 0.0) return (p_ < 2.0) ? inf : (p_ > 2.0 ? 0.0 : 1.0);
            return std::pow(z, 0.5 * (p_ - 2.0));
        }
        case rheology_kind::bingham_regularized:
            return mu_ + tau0_ / std::sqrt(s * s + eps_reg_ * eps_reg_);
        default: fail(error_kind::domain, "mu_of: isotropic models only");
    }
}

double rheology_model::dmu_ds(double s) const {
    switch (kind_) {
        case rheology_kind::newtonian: return 0.0;
        case rheology_kind::power_law:
        case rheology_kind::carreau: {
            double z = mu1_ + mu2_ * s * s;
            if (z == 0.0) return 0.0;
            return (p_ - 2.0) * mu2_ * s * std::pow(z, 0.5 * (p_ - 4.0));
        }
        case rheology_kind::bingham_regularized: {
            double z = s * s + eps_reg_ * eps_reg_;
            return -tau0_ * s / (z * std::sqrt(z));
        }
        default: fail(error_kind::domain, "dmu_ds: isotropic models only");
    }
}

double rheology_model::raw_f(double r) const {
    if (r == 0.0) return 0.0;
    switch (kind_) {
        case rheology_kind::newtonian: return 0.5 * mu_ * r * r;
        case rheology_kind::power_law: {
            if (mu1_ == 0.0) return std::pow(mu2_, 0.5 * (p_ - 2.0)) * std::pow(r, p_) / p_;
            if (mu2_ == 0.0) return 0.5 * std::pow(mu1_, 0.5 * (p_ - 2.0)) * r * r;
            // antiderivative of (mu1 + mu2 s^2)^((p-2)/2) s
            return (std::pow(mu1_ + mu2_ * r * r, 0.5 * p_) - std::pow(mu1_, 0.5 * p_)) /
                   (p_ * mu2_);
        }
        case rheology_kind::carreau: {
            // same family, evaluated by adaptive quadrature as a second route
            auto integrand = [this](double s) { return mu_of(s) * s; };
            double fa = 0.0, fb = integrand(r), fm = integrand(0.5 * r);
            double scale = std::max(1e-30, std::abs(fb) * r);
            return adaptive_simpson(integrand, 0.0, r, fa, fm, fb, 1e-15 * scale, 60);
        }
        case rheology_kind::bingham_regularized:
            return 0.5 * mu_ * r * r +
                   tau0_ * (std::sqrt(r * r + eps_reg_ * eps_reg_) - eps_reg_);
        default: fail(error_kind::domain, "raw_f: isotropic models only");
    }
}

double rheology_model::raw_fprime(double r) const {
    if (r == 0.0) return 0.0; // minimal selection; mu(0) may be +inf for p < 2
    return mu_of(r) * r;
}

double rheology_model::raw_fsecond(double r) const {
    return mu_of(r) + r * dmu_ds(r);
}

// -- Moreau-Yosida smoothing --------------------------------------------------

// solve e + eps f'(e) = r on [0, r] (monotone increasing in e)
double rheology_model::my_prox(double r) const {
    if (r <= 0.0) return 0.0;
    double lo = 0.0, hi = r;
    auto g = [&](double e) { return e + my_eps_ * raw_fprime(e) - r; };
    double e = r / (1.0 + my_eps_ * raw_fsecond(r)); // decent starting guess
    e = std::clamp(e, 0.0, r);
    for (int it = 0; it < 80; ++it) {
        double ge = g(e);
        if (std::abs(ge) <= 1e-15 * (1.0 + r)) break;
        if (ge > 0.0) hi = e; else lo = e;
        double gp = 1.0 + my_eps_ * raw_fsecond(e);
        double step = (std::isfinite(gp) && gp > 0.0) ? ge / gp : 0.0;
        double cand = e - step;
        e = (cand > lo && cand < hi) ? cand : 0.5 * (lo + hi);
    }
    return e;
}

double rheology_model::f_radial(double r) const {
    if (my_eps_ <= 0.0) return raw_f(r);
    double e = my_prox(r);
    double dr = r - e;
    return raw_f(e) + dr * dr / (2.0 * my_eps_);
}

double rheology_model::f_prime(double r) const {
    if (my_eps_ <= 0.0) return raw_fprime(r);
    return (r - my_prox(r)) / my_eps_;
}

double rheology_model::f_second(double r) const {
    if (my_eps_ <= 0.0) return raw_fsecond(r);
    double e = my_prox(r);
    double fs = raw_fsecond(e);
    if (!std::isfinite(fs)) return 1.0 / my_eps_;
    return fs / (1.0 + my_eps_ * fs);
}

bool rheology_model::fstar_closed_available() const {
    if (my_eps_ > 0.0) return false; // handled additively in fstar_radial
    return (kind_ == rheology_kind::newtonian) ||
           (kind_ == rheology_kind::power_law && mu1_ == 0.0);
}

double rheology_model::fstar_radial_closed(double sigma) const {
    switch (kind_) {
        case rheology_kind::newtonian: return sigma * sigma / (2.0 * mu_);
        case rheology_kind::power_law: {
            // f(r) = kappa r^p / p  =>  f*(s) = kappa^(1-p') s^p' / p'
            double kappa = std::pow(mu2_, 0.5 * (p_ - 2.0));
            double pc = p_ / (p_ - 1.0);
            return std::pow(kappa, 1.0 - pc) * std::pow(sigma, pc) / pc;
        }
        default: fail(error_kind::domain, "no closed-form conjugate for this model");
    }
}

double rheology_model::fstar_radial_numeric(double sigma) const {
    if (sigma <= 0.0) return 0.0;
    // objective g(r) = sigma r - f(r) is concave with g'(r) = sigma - f'(r),
    // f' nondecreasing; bracket the root of g' by doubling.
    double hi = 1.0;
    const double horizon = 1e18;
    while (f_prime(hi) < sigma) {
        hi *= 2.0;
        if (hi > horizon) {
            // f' stays below sigma: the objective sigma r - f(r) keeps
            // increasing. Decide between a divergent supremum and a finite
            // limit approached at infinity from the increment ratio.
            auto obj = [&](double r) { return sigma * r - f_radial(r); };
            double o1 = obj(horizon / 4.0), o2 = obj(horizon / 2.0), o3 = obj(horizon);
            double d1 = o2 - o1, d2 = o3 - o2;
            if (d2 > 0.5000001 * d1 && d2 > 0.0) return inf; // near-linear growth
            if (d1 <= 0.0 || d2 <= 0.0) return std::max(o3, 0.0);
            // geometric tail sum
            return std::max(o3 + d2 * d2 / (d1 - d2), 0.0);
        }
    }
    double lo = hi * 0.5 > 1.0 ? hi * 0.5 : 0.0;
    if (f_prime(lo) > sigma) lo = 0.0;
    // golden-section shrink on g' sign, then Newton polish on f'(r) = sigma
    for (int it = 0; it < 8; ++it) {
        double m1 = lo + 0.381966 * (hi - lo);
        if (f_prime(m1) < sigma) lo = m1; else hi = m1;
    }
    double r = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        double g = f_prime(r) - sigma;
        if (g > 0.0) hi = r; else lo = r;
        double fs = f_second(r);
        double cand = (std::isfinite(fs) && fs > 0.0) ? r - g / fs : 0.5 * (lo + hi);
        r = (cand > lo && cand < hi) ? cand : 0.5 * (lo + hi);
        if (hi - lo <= kSolveTol * (1.0 + hi)) break;
    }
    double val = sigma * r - f_radial(r);
    return std::max(val, 0.0); // F* >= 0 since F(0) = 0
}

double rheology_model::fstar_radial(double sigma) const {
    if (my_eps_ > 0.0) {
        // (f_eps)* = f* + eps sigma^2 / 2
        rheology_model raw = *this;
        raw.my_eps_ = 0.0;
        return raw.fstar_radial(sigma) + 0.5 * my_eps_ * sigma * sigma;
    }
    if (fstar_closed_available()) return fstar_radial_closed(sigma);
    return fstar_radial_numeric(sigma);
}

double rheology_model::effective_viscosity(double s, double s_floor) const {
    if (kind_ == rheology_kind::euler) return 0.0;
    if (kind_ == rheology_kind::anisotropic_wrap)
        return L_norm_ * L_norm_ * base_->effective_viscosity(L_norm_ * s, s_floor);
    if (my_eps_ > 0.0) {
        double r = std::max(s, s_floor);
        return (r > 0.0) ? f_prime(r) / r : f_second(0.0);
    }
    double mu = mu_of(std::max(s, s_floor));
    return std::isfinite(mu) ? mu : mu_of(std::max(s_floor, 1e-12));
}

// -- wrap plumbing -----------------------------------------------------------

sym_tensor apply_wrap_map(const rheology_model& m, const sym_tensor& t, bool transpose) {
    Eigen::VectorXd w =
        transpose ? Eigen::VectorXd(m.L_.transpose() * vectorize(t)) : Eigen::VectorXd(m.L_ * vectorize(t));
    return devectorize(m.d_, w);
}

// -- public operations ---------------------------------------------------------

double eval_F(const rheology_model& model, const sym_tensor& D) {
    model.require_validated();
    if (!D.finite()) fail(error_kind::domain, "eval_F: non-finite strain rate");
    if (model.kind_ == rheology_kind::anisotropic_wrap || model.kind_ == rheology_kind::euler) {
        sym_tensor W = apply_wrap_map(model, D, false);
        return eval_F(*model.base_, W);
    }
    return model.f_radial(frob_norm(D));
}

double eval_F_star(const rheology_model& model, const sym_tensor& S) {
    model.require_validated();
    if (!S.finite()) fail(error_kind::domain, "eval_F_star: non-finite stress");
    if (model.kind_ == rheology_kind::anisotropic_wrap || model.kind_ == rheology_kind::euler) {
        // F_L*(S) = F*((L^t)^+ S) when S lies in range(L^t), +inf otherwise
        Eigen::VectorXd s = vectorize(S);
        Eigen::VectorXd mvec = model.pinv_LT_ * s;
        Eigen::VectorXd resid = model.L_.transpose() * mvec - s;
        if (resid.norm() > kRangeTol * (1.0 + s.norm())) return inf;
        return eval_F_star(*model.base_, devectorize(model.d_, mvec));
    }
    return model.fstar_radial(frob_norm(S));
}

sym_tensor stress_from_D(const rheology_model& model, const sym_tensor& D) {
    model.require_validated();
    if (!D.finite()) fail(error_kind::domain, "stress_from_D: non-finite strain rate");
    if (model.kind_ == rheology_kind::anisotropic_wrap || model.kind_ == rheology_kind::euler) {
        sym_tensor W = apply_wrap_map(model, D, false);
        sym_tensor M = stress_from_D(*model.base_, W);
        return apply_wrap_map(model, M, true);
    }
    double r = frob_norm(D);
    if (r == 0.0) return sym_tensor::zero(model.dim()); // minimal-norm selection
    double scale = model.f_prime(r) / r;
    sym_tensor S = D;
    S *= scale;
    return S;
}

double fenchel_young_gap(const rheology_model& model, const sym_tensor& S, const sym_tensor& D) {
    double fs = eval_F_star(model, S);
    if (!std::isfinite(fs)) return inf;
    return eval_F(model, D) + fs - frob_dot(S, D);
}

double asymptotic_F(const rheology_model& model, const sym_tensor& D, double s_max) {
    model.require_validated();
    if (s_max < 1e3) fail(error_kind::domain, "asymptotic_F: s_max >= 1e3 required");
    if (frob_norm(D) == 0.0) return 0.0;
    auto g = [&](double s) {
        sym_tensor sd = D;
        sd *= s;
        return eval_F(model, sd) / s;
    };
    double g1 = g(s_max / 4.0), g2 = g(s_max / 2.0), g4 = g(s_max);
    if (g4 > 1.25 * g2 && g2 > 1.25 * g1 && g4 > 1e-12) return inf; // superlinear growth
    // Richardson in 1/s assuming g = g_inf + a/s + b/s^2
    double r1 = 2.0 * g2 - g1;
    double r2 = 2.0 * g4 - g2;
    return (4.0 * r2 - r1) / 3.0;
}

// -- deterministic sampling ----------------------------------------------------

double next_uniform(std::uint64_t& state) {
    // xorshift64*
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    std::uint64_t z = state * 0x2545F4914F6CDD1DULL;
    return static_cast<double>(z >> 11) * (1.0 / 9007199254740992.0);
}

double next_gaussian(std::uint64_t& state) {
    double u1 = next_uniform(state);
    double u2 = next_uniform(state);
    if (u1 <= 0.0) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

sym_tensor random_sym_tensor(int d, std::uint64_t& state) {
    sym_tensor t(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) t.set(i, j, next_gaussian(state));
    return t;
}

hypothesis_report validate_hypotheses(const rheology_model& model, int samples,
                                      std::uint64_t seed) {
    model.require_validated();
    if (samples < 100) fail(error_kind::domain, "validate_hypotheses: samples >= 100 required");
    std::uint64_t st = seed ? seed : 1;
    hypothesis_report rep;
    const int d = model.dim();

    // Fenchel-Young: equality on the subdifferential graph, inequality off it.
    rep.fenchel_young_ok = true;
    for (int i = 0; i < samples; ++i) {
        sym_tensor D = random_sym_tensor(d, st);
        double mag = std::pow(10.0, -2.0 + 4.0 * next_uniform(st));
        double nd = frob_norm(D);
        if (nd > 0) D *= mag / nd;
        sym_tensor S = stress_from_D(model, D);
        double gap = fenchel_young_gap(model, S, D);
        double scale = 1.0 + eval_F(model, D) + (std::isfinite(gap) ? std::abs(gap) : 0.0);
        if (std::isfinite(gap) && (gap < -1e-10 * scale || gap > 1e-8 * scale))
            rep.fenchel_young_ok = false;
        sym_tensor S2 = random_sym_tensor(d, st);
        double gap2 = fenchel_young_gap(model, S2, D);
        if (std::isfinite(gap2) && gap2 < -1e-10 * (1.0 + std::abs(gap2)))
            rep.fenchel_young_ok = false;
    }

    // (DD4): sampled slopes F*(S)/|S| at |S| = 10^k, k = 1..4
    const int ndir = 16;
    for (int k = 1; k <= 4; ++k) {
        double radius = std::pow(10.0, k);
        double worst = 0.0;
        bool any_inf = false;
        std::uint64_t ds = seed + 77 * static_cast<std::uint64_t>(k);
        for (int i = 0; i < ndir; ++i) {
            sym_tensor S = random_sym_tensor(d, ds);
            double ns = frob_norm(S);
            if (ns == 0) continue;
            S *= radius / ns;
            double fs = eval_F_star(model, S);
            if (!std::isfinite(fs)) { any_inf = true; continue; }
            worst = std::max(worst, fs / radius);
        }
        rep.conjugate_superlinear_slope_at[static_cast<size_t>(k - 1)] = any_inf ? inf : worst;
    }
    {
        const auto& sl = rep.conjugate_superlinear_slope_at;
        rep.dd4_ok = std::isinf(sl[3]) ||
                     (sl[3] > 2.0 * sl[0] && sl[3] > sl[2] && sl[2] > sl[1]);
    }

    // Dom F = whole space: F finite at large sampled tensors
    rep.f_domain_full = true;
    for (int i = 0; i < 32; ++i) {
        sym_tensor D = random_sym_tensor(d, st);
        D *= 1e6;
        if (!std::isfinite(eval_F(model, D))) rep.f_domain_full = false;
    }

    // (DD5): largest sampled ball radius on which F* stays finite
    rep.f_star_ball_radius = 0.0;
    for (double radius = 1e-6; radius <= 1e3; radius *= 10.0) {
        bool ok = true;
        std::uint64_t ds =
            seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(std::lround(std::log10(radius)) + 32);
        for (int i = 0; i < ndir; ++i) {
            sym_tensor S = random_sym_tensor(d, ds);
            double ns = frob_norm(S);
            if (ns == 0) continue;
            S *= radius * (0.25 + 0.75 * next_uniform(ds)) / ns;
            if (!std::isfinite(eval_F_star(model, S))) { ok = false; break; }
        }
        if (!ok) break;
        rep.f_star_ball_radius = radius;
    }
    rep.dd5_ok = rep.f_star_ball_radius > 0.0;

    // (DD6)/(DD7) via the asymptotic function on sampled directions
    bool linear_growth_everywhere = true;
    double finf_bound = 0.0;
    for (int i = 0; i < ndir; ++i) {
        sym_tensor D = random_sym_tensor(d, st);
        double nd = frob_norm(D);
        if (nd == 0) continue;
        D *= 1.0 / nd;
        double fi = asymptotic_F(model, D, 1e6);
        if (std::isinf(fi)) continue; // superlinear: outside dom F_inf, fine for DD7
        if (fi <= 1e-10) linear_growth_everywhere = false;
        finf_bound = std::max(finf_bound, fi);
    }
    rep.f_infinity_linear_bound = finf_bound;
    rep.dd6_ok = linear_growth_everywhere;
    rep.dd7_ok = std::isfinite(finf_bound);

    rep.all_ok = rep.fenchel_young_ok && rep.f_domain_full && rep.dd4_ok && rep.dd5_ok &&
                 rep.dd6_ok && rep.dd7_ok;
    return rep;
}

} // namespace drheo
