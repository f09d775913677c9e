// Test-only oracles, independent of the library's evaluation paths:
// Romberg quadrature for the radial potential, a dense-scan Legendre
// transform, finite differences for subdifferential selections, and the
// closed-form Taylor-Green fields on the period-2 torus.
#ifndef DRHEO_TEST_ORACLES_HPP
#define DRHEO_TEST_ORACLES_HPP

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Romberg integration of f on [0, b]
inline double romberg(const std::function<double(double)>& f, double b, int levels = 18) {
    std::vector<double> row(static_cast<size_t>(levels), 0.0);
    double h = b;
    row[0] = 0.5 * h * (f(0.0) + f(b));
    for (int k = 1; k < levels; ++k) {
        h *= 0.5;
        double sum = 0.0;
        long pts = 1L << (k - 1);
        for (long i = 0; i < pts; ++i) sum += f((2 * i + 1) * h);
        std::vector<double> next(static_cast<size_t>(levels), 0.0);
        next[0] = 0.5 * row[0] + h * sum;
        double p4 = 1.0;
        for (int j = 1; j <= k; ++j) {
            p4 *= 4.0;
            next[static_cast<size_t>(j)] =
                (p4 * next[static_cast<size_t>(j - 1)] - row[static_cast<size_t>(j - 1)]) / (p4 - 1.0);
        }
        row = next;
    }
    return row[static_cast<size_t>(levels - 1)];
}

// dense scan + golden refinement of sup_{r >= 0} [sigma r - f(r)]
inline double legendre_bruteforce(const std::function<double(double)>& f, double sigma,
                                  double r_max) {
    const int n = 4000;
    double best = 0.0, best_r = 0.0;
    for (int i = 0; i <= n; ++i) {
        double r = r_max * i / n;
        double v = sigma * r - f(r);
        if (v > best) { best = v; best_r = r; }
    }
    double lo = std::max(0.0, best_r - r_max / n), hi = std::min(r_max, best_r + r_max / n);
    for (int it = 0; it < 200; ++it) {
        double m1 = lo + 0.381966 * (hi - lo), m2 = hi - 0.381966 * (hi - lo);
        if (sigma * m1 - f(m1) < sigma * m2 - f(m2)) lo = m1; else hi = m2;
    }
    double r = 0.5 * (lo + hi);
    return std::max(best, sigma * r - f(r));
}

// Taylor-Green vortex on [-1,1]^2: amplitude decays at rate mu pi^2 for the
// Newtonian law S = mu D (obtained by substituting the vortex into the
// momentum balance; the convective term is the gradient of the
// quarter-amplitude cosine pressure).
struct taylor_green2d {
    double amplitude = 1.0;
    double vx(double x, double y) const { return amplitude * std::sin(pi * x) * std::cos(pi * y); }
    double vy(double x, double y) const { return -amplitude * std::cos(pi * x) * std::sin(pi * y); }
    double pressure(double x, double y) const {
        return amplitude * amplitude / 4.0 * (std::cos(2 * pi * x) + std::cos(2 * pi * y));
    }
    static double kinetic_energy(double amplitude) { return amplitude * amplitude; }
    static double decay_rate(double mu) { return mu * pi * pi; }
};

} // namespace oracle

#endif
