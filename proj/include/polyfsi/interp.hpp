/// @file interp.hpp
/// @brief Local cubic (Catmull-Rom) interpolation on uniform grids, periodic
///        and clamped variants, with analytic derivatives.

#pragma once

#include <cmath>
#include <span>

namespace polyfsi::interp {

/// Catmull-Rom weights for the four samples around fractional offset t in
/// [0,1). Interpolates the two middle samples exactly at t = 0, 1.
inline void cr_weights(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2 * t2 - t);
    w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
    w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
}

inline void cr_weights_deriv(double t, double w[4]) {
    const double t2 = t * t;
    w[0] = 0.5 * (-3 * t2 + 4 * t - 1);
    w[1] = 0.5 * (9 * t2 - 10 * t);
    w[2] = 0.5 * (-9 * t2 + 8 * t + 1);
    w[3] = 0.5 * (3 * t2 - 2 * t);
}

inline int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

inline int clamp(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

/// Periodic cubic evaluation of samples f_j at x_j = origin + j*h.
inline double periodic_cubic(std::span<const double> f, double origin, double h,
                             double x) {
    const int n = static_cast<int>(f.size());
    const double u = (x - origin) / h;
    const double fl = std::floor(u);
    const int i = static_cast<int>(fl);
    double w[4];
    cr_weights(u - fl, w);
    double s = 0;
    for (int k = 0; k < 4; ++k) s += w[k] * f[wrap(i - 1 + k, n)];
    return s;
}

/// d/dx of the periodic cubic interpolant.
inline double periodic_cubic_deriv(std::span<const double> f, double origin,
                                   double h, double x) {
    const int n = static_cast<int>(f.size());
    const double u = (x - origin) / h;
    const double fl = std::floor(u);
    const int i = static_cast<int>(fl);
    double w[4];
    cr_weights_deriv(u - fl, w);
    double s = 0;
    for (int k = 0; k < 4; ++k) s += w[k] * f[wrap(i - 1 + k, n)];
    return s / h;
}

}  // namespace polyfsi::interp
