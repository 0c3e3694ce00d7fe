/// @file stokes.hpp
/// @brief Implicit viscous stepping and pressure projection on the mapped
///        staggered grid.
///
/// The Crank-Nicolson solve uses the strain-assembled viscous operator at
/// the midpoint geometry (symmetric positive definite together with the
/// conservative mass term) and a constant-coefficient spectral solver as
/// preconditioner: FFT along the periodic direction, tridiagonal solves
/// across. The projection inverts div M^{-1} div^T with the same kind of
/// preconditioner; constants are deflated.

#pragma once

#include <functional>

#include "polyfsi/mac_grid.hpp"

namespace polyfsi::stokes {

struct Pcg {
    int iters = 0;
    double rel = 1.0;
    bool ok = false;
};

/// Constant-coefficient (identity metrics) solvers used as preconditioners.
/// One instance per layout; plans and buffers are reused.
class SpectralPrecond {
  public:
    explicit SpectralPrecond(const mac::Layout& lay);

    /// Approximate solve of the identity-metric projection operator
    /// (Neumann in zeta, periodic in xi); the constant mode is pinned.
    Grid2D poisson(const Grid2D& r) const;

    /// Approximate solve of vol/dt + (1/2) * componentwise viscous part.
    mac::FaceField helmholtz(const mac::FaceField& r, double inv_dt) const;

    const mac::Layout& layout() const { return lay_; }

  private:
    mac::Layout lay_;
};

/// Volume-weighted pressure-gradient term -D^T p (equals M grad_dual(p)).
mac::FaceField weighted_grad(const mac::Metrics& m, const Grid2D& p);

/// Preconditioned CG on cell scalars; the operator must be SPD modulo
/// constants (they are deflated). Deterministic reductions.
Pcg pcg_cells(const std::function<Grid2D(const Grid2D&)>& apply,
              const std::function<Grid2D(const Grid2D&)>& precond, const Grid2D& b,
              Grid2D& x, double tol, int maxit);

/// Preconditioned CG on face fields (wall rows excluded from the dot
/// products by keeping them zero).
Pcg pcg_faces(const std::function<mac::FaceField(const mac::FaceField&)>& apply,
              const std::function<mac::FaceField(const mac::FaceField&)>& precond,
              const mac::FaceField& b, mac::FaceField& x, double tol, int maxit);

struct StepOptions {
    double tol_visc = 1e-11;
    double tol_proj = 1e-11;
    int maxit = 600;
};

struct ProjectionResult {
    Grid2D q;  // pressure increment
    Pcg stats;
    double div_after = 0;
};

/// Make u exactly divergence-free in the given geometry:
/// u <- u - dt * grad_dual(q). Wall rows are untouched.
ProjectionResult project(const mac::Metrics& m_new, mac::FaceField& u, double dt,
                         const SpectralPrecond& prec, double tol, int maxit);

struct HomStepResult {
    mac::FaceField w;
    Grid2D q;
    Pcg visc, proj;
    double div_after = 0;
};

/// One Crank-Nicolson step of the mapped Stokes operator with zero boundary
/// data followed by the projection. extra_weighted carries every explicit
/// volume-weighted forcing term at the step midpoint (body force, stress
/// divergence, convection, extension terms); p_lag is the lagged pressure
/// whose dual gradient at the midpoint geometry is subtracted.
HomStepResult stokes_step_homogeneous(const mac::Metrics& m_old,
                                      const mac::Metrics& m_mid,
                                      const mac::Metrics& m_new,
                                      const mac::FaceField& w_old,
                                      const mac::FaceField& extra_weighted,
                                      const Grid2D& p_lag, double dt,
                                      const SpectralPrecond& prec,
                                      const StepOptions& opt = {});

}  // namespace polyfsi::stokes
