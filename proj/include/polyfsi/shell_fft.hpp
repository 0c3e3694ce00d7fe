/// @file shell_fft.hpp
/// @brief Real FFT utilities for periodic shell grids on [0,2pi)^(d-1):
///        spectral differentiation, Sobolev norms, and trigonometric
///        resampling between power-of-two grids.
///
/// Plans are created once per size with FFTW_ESTIMATE (deterministic plan
/// choice) and cached behind a mutex; execution uses the new-array interface
/// and is safe from concurrent readers.

#pragma once

#include <complex>
#include <span>
#include <vector>

#include "polyfsi/core.hpp"

namespace polyfsi::sfft {

/// Forward normalized coefficients: c_k = (1/n) sum_j f_j exp(-i k y_j),
/// k = 0..n/2 stored (real input). backward(forward(f)) == f.
void forward_1d(std::span<const double> f, std::vector<std::complex<double>>& c);
void backward_1d(std::span<const std::complex<double>> c, std::span<double> f);

/// Spectral d^order/dy^order on the periodic grid. Nyquist zeroed for odd
/// orders.
std::vector<double> derivative_1d(std::span<const double> f, int order);

/// Trig-interpolation resample of a periodic field from n to m points.
/// Nyquist is dropped when truncating so derivatives commute with resampling.
std::vector<double> resample_1d(std::span<const double> f, int m);

/// l2 norm sqrt(int |f|^2) over [0,2pi) via Parseval.
double l2_norm_1d(std::span<const double> f);

/// Seminorm |f|_k = ||d^k f||_{L2}.
double seminorm_1d(std::span<const double> f, int order);

/// Full Sobolev norm with weights (1+|k|^2)^s.
double sobolev_norm_1d(std::span<const double> f, int s);

// ----- 2d periodic grids (shells of 3d slabs), row-major (n x n) -----

void forward_2d(const Grid2D& f, std::vector<std::complex<double>>& c);
void backward_2d(std::span<const std::complex<double>> c, Grid2D& f);

/// Mixed partial d^{a}/dy1^{a} d^{b}/dy2^{b}.
Grid2D derivative_2d(const Grid2D& f, int a, int b);

double l2_norm_2d(const Grid2D& f);
double sobolev_norm_2d(const Grid2D& f, int s);

}  // namespace polyfsi::sfft
