/// @file robin_pressure.hpp
/// @brief Elliptic recovery of the initial pressure: interior Poisson
///        equation with a Robin closure on the flexible top boundary and a
///        Neumann flux on the rigid bottom.
///
/// The interior operator is the mimetic div(grad) of the mapped grid. At the
/// top, the prescribed identity n_eta . grad p + c_R p = data is turned into
/// the face flux through a one-sided second-order face value of p, which
/// leaves the system mildly nonsymmetric; the solve runs preconditioned
/// BiCGStab against the constant-coefficient spectral solver.

#pragma once

#include <vector>

#include "polyfsi/mac_grid.hpp"
#include "polyfsi/stokes.hpp"

namespace polyfsi::robin {

struct RobinInput {
    Grid2D rhs;                       // interior right side, physical units
    std::vector<double> bottom_flux;  // dp/dz at the flat bottom, per column
    std::vector<double> robin_coeff;  // c_R at top face centers (> 0)
    std::vector<double> robin_data;   // Robin right side at top face centers
};

struct RobinResult {
    Grid2D p;
    int iters = 0;
    double rel = 1.0;
};

/// Solve to the requested relative residual; throws ConvergenceError when
/// the budget is exhausted.
RobinResult solve(const mac::Metrics& m, const RobinInput& in,
                  const stokes::SpectralPrecond& prec, double tol = 1e-10,
                  int maxit = 4000);

/// Area element of the moving top boundary per unit xi on the fluid grid,
/// sqrt(1 + Zxi^2) at top face centers.
std::vector<double> top_area_element(const mac::Metrics& m);

/// Mimetic divergence of face samples of a general vector field whose wall
/// fluxes are prescribed explicitly (the zero-trace flux convention of the
/// velocity operators does not apply to arbitrary data like body forces).
/// Flux densities are per unit xi: top = v . (-Zxi, 1), bottom = v_z.
Grid2D div_faces_with_wall_flux(const mac::Metrics& m, const mac::FaceField& v,
                                std::span<const double> top_flux_density,
                                std::span<const double> bottom_flux_density);

}  // namespace polyfsi::robin
