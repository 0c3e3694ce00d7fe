/// @file solvent_structure.hpp
/// @brief Strongly coupled time stepping of the solvent-structure subproblem
///        under a frozen extra stress.
///
/// One step advances shell and fluid together by sub-iterations: the shell
/// trapezoid receives the interface load, the displacement rebuilds the
/// metrics, the kinematic datum feeds the divergence-free extension, and the
/// zero-trace remainder w = u - Phi takes a Crank-Nicolson Stokes step with
/// the extension terms, the lagged pressure gradient, the frozen stress
/// divergence and the extrapolated convection on the right side.
///
/// Load transfer is variational by default: the interface load is the
/// transpose of the extension applied to the discrete momentum residual, so
/// the interface power cancels between fluid and shell to the order of the
/// scheme and the step energy ledger closes at O(dt^3). The pointwise
/// traction evaluation of the boundary stress is provided as well, both as a
/// diagnostic and as an alternative transfer.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "polyfsi/extension.hpp"
#include "polyfsi/geometry.hpp"
#include "polyfsi/mac_grid.hpp"
#include "polyfsi/shell.hpp"
#include "polyfsi/solute.hpp"
#include "polyfsi/stokes.hpp"

namespace polyfsi::ss {

struct Options {
    double tol_fsi = 1e-8;
    int max_subiter = 100;
    double relax = 0.5;
    bool aitken = false;
    bool variational_load = true;
    stokes::StepOptions solver;
};

struct DataFeeds {
    /// Body force components sampled on the faces of the given geometry.
    std::function<mac::FaceField(double t, const mac::Metrics& m)> body_force;
    /// Shell forcing on the shell nodes.
    std::function<std::vector<double>(double t)> shell_force;
};

/// Frozen stress levels for one step (cell tensors); null means zero.
struct StressPair {
    const solute::StressField* old_level = nullptr;
    const solute::StressField* new_level = nullptr;
};

struct StepLedger {
    double t0 = 0, t1 = 0;
    double e_shell_kin = 0, e_shell_el = 0, e_fluid = 0;  // at t1
    double d_shell = 0, d_fluid = 0;                      // dt-integrated
    double w_f = 0, w_g = 0, w_t = 0, w_load = 0;         // dt-integrated
    double residual = 0;                                  // energy closure defect
    double lambda = 0;
    int subiters = 0;
    double interface_resid = 0;
    double div_after = 0;
    double kin_trace_err = 0;
    double momentum_defect = 0;  // interior residual of the discrete balance
    int visc_iters = 0, proj_iters = 0;
};

class Stepper {
  public:
    Stepper(const ReferenceGeometry& geom, int nx, int nz, Options opt = {});

    struct State {
        double t = 0;
        std::vector<double> eta, eta_t;  // shell grid
        mac::FaceField w;                // zero-trace fluid remainder
        mac::FaceField u;                // w + extension
        Grid2D p;                        // lagged pressure (half level)
        mac::Metrics metrics;            // geometry at eta(t)
        ext::SlabExtension phi;          // extension at t
        // convection history for the two-level extrapolation
        std::vector<mac::FaceField> conv_hist;  // weighted terms at half levels
    };

    const mac::Layout& layout() const { return lay_; }
    const ReferenceGeometry& geom() const { return *geom_; }
    const Options& options() const { return opt_; }

    /// Build a consistent initial state: sample the initial velocity,
    /// subtract the extension of eta_star, project the remainder, set the
    /// lagged pressure.
    State make_state(std::span<const double> eta0, std::span<const double> eta_star,
                     const std::function<Vec(const Vec&)>& u0,
                     const Grid2D* p0 = nullptr) const;

    /// One strongly coupled step; returns the per-step ledger.
    StepLedger advance(State& s, double dt, const DataFeeds& data,
                       const StressPair& stress = {}) const;

    /// Max norm of the kinematic mismatch u2_top - (xi - K) on the fluid
    /// columns (the tangential trace is zero by construction).
    double kinematic_trace_error(const State& s) const;

    /// Fluid kinetic energy, Jacobian weighted.
    static double fluid_energy(const mac::Metrics& m, const mac::FaceField& u);

  private:
    mac::FaceField assemble_external(double t_mid, const mac::Metrics& m_mid,
                                     const DataFeeds& data, const StressPair& stress,
                                     mac::FaceField* divT_mid_out) const;

    const ReferenceGeometry* geom_;
    mac::Layout lay_;
    Options opt_;
    stokes::SpectralPrecond prec_;
    ShellIntegrator shell_;
    int shell_n_;
    CutoffProfile ext_pc_;  // lift profile, supported in the inner tube
};

/// Pointwise boundary traction: -(S n_eta) . n a_eta per fluid column at the
/// moving top, with one-sided second-order stencils; S = grad u + grad u^T
/// - p I + T. Stress grids may be null.
std::vector<double> assemble_shell_load(const mac::Metrics& m, const mac::FaceField& u,
                                        const Grid2D& p, const Grid2D* t11,
                                        const Grid2D* t12, const Grid2D* t22);

}  // namespace polyfsi::ss
