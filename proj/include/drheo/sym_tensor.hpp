#ifndef DRHEO_SYM_TENSOR_HPP
#define DRHEO_SYM_TENSOR_HPP

#include <array>
#include <cmath>
#include <cstddef>

#include "drheo/errors.hpp"

namespace drheo {

// Symmetric d x d tensor, d = 2 or 3, stored as the full row-major matrix.
// Construction goes through the upper triangle so symmetry is exact by
// layout, not by later correction.
struct sym_tensor {
    int d = 2;
    std::array<double, 9> m{}; // row-major, only the leading d*d entries used

    sym_tensor() = default;

    explicit sym_tensor(int dim) : d(dim) {
        if (dim != 2 && dim != 3) fail(error_kind::domain, "sym_tensor: d must be 2 or 3");
    }

    static sym_tensor from_upper(int dim, std::initializer_list<double> upper) {
        sym_tensor t(dim);
        auto it = upper.begin();
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) {
                double v = (it != upper.end()) ? *it++ : 0.0;
                t(i, j) = v;
                t(j, i) = v;
            }
        return t;
    }

    static sym_tensor diag(int dim, double a, double b, double c = 0.0) {
        sym_tensor t(dim);
        t(0, 0) = a;
        t(1, 1) = b;
        if (dim == 3) t(2, 2) = c;
        return t;
    }

    static sym_tensor zero(int dim) { return sym_tensor(dim); }

    double& operator()(int i, int j) { return m[static_cast<size_t>(i * d + j)]; }
    double operator()(int i, int j) const { return m[static_cast<size_t>(i * d + j)]; }

    void set(int i, int j, double v) {
        (*this)(i, j) = v;
        (*this)(j, i) = v;
    }

    bool finite() const {
        for (int i = 0; i < d * d; ++i)
            if (!std::isfinite(m[static_cast<size_t>(i)])) return false;
        return true;
    }

    double trace() const {
        double s = 0;
        for (int i = 0; i < d; ++i) s += (*this)(i, i);
        return s;
    }

    sym_tensor& operator+=(const sym_tensor& o) {
        for (int i = 0; i < d * d; ++i) m[static_cast<size_t>(i)] += o.m[static_cast<size_t>(i)];
        return *this;
    }
    sym_tensor& operator-=(const sym_tensor& o) {
        for (int i = 0; i < d * d; ++i) m[static_cast<size_t>(i)] -= o.m[static_cast<size_t>(i)];
        return *this;
    }
    sym_tensor& operator*=(double a) {
        for (int i = 0; i < d * d; ++i) m[static_cast<size_t>(i)] *= a;
        return *this;
    }

    friend sym_tensor operator+(sym_tensor a, const sym_tensor& b) { return a += b; }
    friend sym_tensor operator-(sym_tensor a, const sym_tensor& b) { return a -= b; }
    friend sym_tensor operator*(double a, sym_tensor t) { return t *= a; }
};

// Frobenius inner product A:B = sum_ij A_ij B_ij.
inline double frob_dot(const sym_tensor& a, const sym_tensor& b) {
    double s = 0;
    for (int i = 0; i < a.d * a.d; ++i) s += a.m[static_cast<size_t>(i)] * b.m[static_cast<size_t>(i)];
    return s;
}

inline double frob_norm(const sym_tensor& a) { return std::sqrt(frob_dot(a, a)); }

// Smallest eigenvalue, closed form for 2x2 and a Cardano-style reduction for 3x3.
double min_eigenvalue(const sym_tensor& a);

} // namespace drheo

#endif
