/// @file shell.hpp
/// @brief Damped-plate dynamics of the flexible shell, diagonal per Fourier
///        mode: eta_tt - (eta_t)_yy'' damping + 4th-order stiffness.
///
/// The trapezoidal step is exact on the quadratic energy ledger: per step,
/// d(kinetic + elastic) + dt * damping == dt * <rhs_mid, v_mid> to roundoff.
/// The mean mode can carry a uniform constraint multiplier that freezes the
/// mean velocity; with an enclosed incompressible solvent the shell cannot
/// change the fluid volume, and that multiplier is the reaction pressure.

#pragma once

#include <span>
#include <vector>

#include "polyfsi/core.hpp"

namespace polyfsi {

class ShellIntegrator {
  public:
    explicit ShellIntegrator(int n) : n_(n) {}

    int n() const { return n_; }

    struct Step {
        std::vector<double> eta;
        std::vector<double> eta_t;
        double lambda = 0.0;  // uniform constraint load (0 when unconstrained)
    };

    /// One trapezoidal step of eta_tt + |k|^2 eta_t + |k|^4 eta = rhs with
    /// rhs sampled at the step midpoint. With constrain_mean the k = 0 mode
    /// is closed by a uniform load lambda such that mean(eta_t) stays zero.
    Step step(std::span<const double> eta, std::span<const double> eta_t,
              std::span<const double> rhs_mid, double dt,
              bool constrain_mean) const;

    /// Spectral solve of the static problem (4th derivative) = rhs for a
    /// mean-zero rhs; returns the mean-zero solution.
    static std::vector<double> solve_biharmonic(std::span<const double> rhs);

  private:
    int n_;
};

}  // namespace polyfsi
