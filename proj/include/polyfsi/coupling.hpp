/// @file coupling.hpp
/// @brief Partitioned fixed-point glue: alternate the solvent-structure
///        window solve and the characteristic solute solve, watch the
///        contraction of the stress iterates, adapt the window length, and
///        chain windows into a simulation.

#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "polyfsi/diagnostics.hpp"
#include "polyfsi/robin_pressure.hpp"
#include "polyfsi/solute.hpp"
#include "polyfsi/solvent_structure.hpp"

namespace polyfsi::coupling {

// ---------------------------------------------------------------------------
// grid-backed space-time velocity source
// ---------------------------------------------------------------------------

/// Time-stamped solver output over a window, evaluable as a velocity field
/// in physical space-time: cubic in space on each stamp (through the stamp's
/// own pullback), linear in time between stamps.
class GridHistory final : public solute::VelocityField {
  public:
    GridHistory(const mac::Layout& lay, const CutoffProfile& pc);

    void add_stamp(double t, const mac::FaceField& u,
                   const std::vector<double>& eta_f);

    int stamps() const { return static_cast<int>(times_.size()); }
    double t_front() const { return times_.front(); }
    double t_back() const { return times_.back(); }

    int dim() const override { return 2; }
    Vec velocity(double t, const Vec& x) const override;
    oldroyd::Mat gradient(double t, const Vec& x) const override;
    double boundary_excess(double t, const Vec& x) const override;
    Vec project_inside(double t, const Vec& x) const override;

    /// Displacement at time t and tangential coordinate y (cubic/linear).
    double eta_at(double t, double y) const;

  private:
    struct Stamp {
        Grid2D u1pad, u2pad;                  // padded face fields
        Grid2D g11, g12, g21, g22;            // padded center gradients
        std::vector<double> eta_f;            // node displacements
    };
    std::pair<int, double> bracket(double t) const;
    double sample_u1(const Stamp& s, double xi, double zeta) const;
    double sample_u2(const Stamp& s, double xi, double zeta) const;
    double sample_cells(const Grid2D& g, double xi, double zeta) const;
    double pullback_zeta(const Stamp& s, double y, double s_hat) const;

    mac::Layout lay_;
    CutoffProfile pc_;
    std::vector<double> times_;
    std::vector<Stamp> stamps_;
};

// ---------------------------------------------------------------------------
// runs and windows
// ---------------------------------------------------------------------------

struct RunSetup {
    std::shared_ptr<ReferenceGeometry> geom;  // FlatSlab2D
    int nx = 64, nz = 64;
    double t_end = 0.5;
    double t_star = 0.125;
    double dt = 1.0 / 256.0;
    ss::Options fsi;
    double tol_fp = 1e-8;
    int max_fp = 10;
    double ball_factor = 10.0;  // R = factor * X-norm of the first iterate
    int min_window_steps = 16;
    double smallness_c = 1.0, smallness_eps = 0.1;
    ss::DataFeeds feeds;
    std::vector<double> eta0, eta_star;           // shell nodes
    std::function<Vec(const Vec&)> u0;            // nullable
    std::function<oldroyd::Mat(const Vec&)> t0;   // nullable (zero stress)
    unsigned seed = 0;
};

struct StressTraj {
    double t0 = 0, dt = 0;
    std::vector<solute::StressField> levels;  // steps + 1 fields
};

struct FpRow {
    int window = 0, k = 0;
    double dy = 0, rho = 0;  // rho <= 0 when undefined
    double x_norm = 0, y_norm = 0;
};

struct WindowReport {
    int iters = 0;
    bool converged = false;
    bool non_contraction = false;
    std::vector<double> dys;
    double rho = -1.0;  // max consecutive ratio; negative when undefined
    bool ball_ok = true;
    double ball_r = 0, x_first = 0;
    std::vector<FpRow> rows;
    double max_symmetry_defect = 0;
    double min_conformation_eig = 1.0;
};

struct WindowResult {
    ss::Stepper::State end_state;
    StressTraj stress;
    std::vector<ss::StepLedger> ledgers;
    WindowReport report;
    // per-level shell snapshots for the trajectory
    std::vector<std::vector<double>> eta_levels, etat_levels;
    std::vector<mac::FaceField> u_levels;
    std::vector<Grid2D> p_levels;
};

struct SmallnessReport {
    double value = 0;
    bool ok = false;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> eta, eta_t;
    std::vector<mac::FaceField> u;
    std::vector<Grid2D> p;
    std::vector<solute::StressField> stress;
    std::vector<ss::StepLedger> ledgers;       // one per step
    std::vector<FpRow> fp_rows;
    std::vector<double> window_starts, window_lengths;
    std::string stop_reason;  // completed | degeneracy | non_contraction |
                              // subsolver_failure
    std::string stop_detail;
    SmallnessReport smallness;
    double compat_err = 0;
    double min_conformation_eig = 1.0;
};

class Driver {
  public:
    explicit Driver(RunSetup setup);

    const RunSetup& setup() const { return setup_; }
    const ss::Stepper& stepper() const { return stepper_; }

    /// Initial state with the elliptic initial pressure.
    ss::Stepper::State initial_state() const;
    solute::StressField initial_stress(const ss::Stepper::State& s) const;
    /// Max mismatch between the sampled initial velocity trace and the
    /// kinematic datum.
    double compatibility_error(const ss::Stepper::State& s) const;

    SmallnessReport check_smallness(const ss::Stepper::State& s,
                                    const solute::StressField& t0) const;

    /// One fixed-point window from the given state. guess == nullptr uses
    /// the stress at t0 held constant. Throws DegeneracyError /
    /// ConvergenceError from the subsolvers; reports non-contraction in the
    /// returned flags instead of converging.
    WindowResult fixed_point_window(const ss::Stepper::State& s0,
                                    const solute::StressField& stress_at_t0,
                                    double t_star, int window_index,
                                    const StressTraj* guess = nullptr) const;

    /// Chain windows to the final time with the adaptive window schedule.
    Trajectory run() const;

  private:
    RunSetup setup_;
    ss::Stepper stepper_;
};

/// Bicubic sample of a stress field at a physical point through the given
/// geometry (used to seed window solves from grid data).
oldroyd::BigVec interp_stress(const mac::Metrics& m, const CutoffProfile& pc,
                              const std::vector<double>& eta_f,
                              const solute::StressField& t, const Vec& xhat);

}  // namespace polyfsi::coupling
