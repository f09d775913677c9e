#include "drheo/sym_tensor.hpp"

#include <algorithm>
#include <cmath>

namespace drheo {

double min_eigenvalue(const sym_tensor& a) {
    if (a.d == 2) {
        double tr = a(0, 0) + a(1, 1);
        double det = a(0, 0) * a(1, 1) - a(0, 1) * a(0, 1);
        double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        return tr / 2.0 - disc;
    }
    // 3x3: eigenvalues of a symmetric matrix via the trigonometric method.
    double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    double q = a.trace() / 3.0;
    if (p1 == 0.0) return std::min({a(0, 0), a(1, 1), a(2, 2)});
    double p2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        double di = a(i, i) - q;
        p2 += di * di;
    }
    p2 += 2.0 * p1;
    double p = std::sqrt(p2 / 6.0);
    // B = (A - q I)/p, r = det(B)/2 in [-1, 1]
    double b[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b[i][j] = (a(i, j) - (i == j ? q : 0.0)) / p;
    double detb = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                  b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                  b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    double r = std::clamp(detb / 2.0, -1.0, 1.0);
    double phi = std::acos(r) / 3.0;
    // smallest eigenvalue uses phi + 2*pi/3
    return q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
}

} // namespace drheo
