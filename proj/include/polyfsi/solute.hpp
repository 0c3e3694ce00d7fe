/// @file solute.hpp
/// @brief Diffusion-free transport of the extra stress by the method of
///        characteristics.
///
/// Particle paths solve dx/dt = v(t, x) with RK4 at half-step resolution so
/// the midpoint samples feed the stress integrator directly. Along each path
/// the vectorized stress solves the linear system
///     dT/dt = (W(t, x(t)) - 2 I) T + Wvec(t, x(t)),
/// again with RK4; a matrix-exponential closed form is provided for constant
/// coefficients. Field solves backtrace per output node (backward
/// semi-Lagrangian) and integrate the stress forward along the stored path,
/// so stresses are defined exactly on the grid.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "polyfsi/core.hpp"
#include "polyfsi/oldroyd.hpp"

namespace polyfsi::solute {

/// Velocity source for characteristic tracing. Implementations must be
/// evaluable slightly outside the moving domain (provisional RK4 stages may
/// overshoot the boundary).
class VelocityField {
  public:
    virtual ~VelocityField() = default;
    virtual int dim() const = 0;
    virtual Vec velocity(double t, const Vec& x) const = 0;
    /// Gradient with entries (i,j) = dv_i/dx_j.
    virtual oldroyd::Mat gradient(double t, const Vec& x) const = 0;
    /// Positive when x lies outside the moving domain, measured in the
    /// boundary normal coordinate; accepted samples are checked against it.
    virtual double boundary_excess(double t, const Vec& x) const { (void)t; (void)x; return -1.0; }
    /// Pull a slightly-outside point back onto the admissible side.
    virtual Vec project_inside(double t, const Vec& x) const { (void)t; return x; }
};

/// Closure-backed field for analytic tests and presets.
class AnalyticVelocity final : public VelocityField {
  public:
    using VelFn = std::function<Vec(double, const Vec&)>;
    using GradFn = std::function<oldroyd::Mat(double, const Vec&)>;
    using ExcessFn = std::function<double(double, const Vec&)>;

    AnalyticVelocity(int dim, VelFn vel, GradFn grad, ExcessFn excess = nullptr)
        : dim_(dim), vel_(std::move(vel)), grad_(std::move(grad)),
          excess_(std::move(excess)) {}

    int dim() const override { return dim_; }
    Vec velocity(double t, const Vec& x) const override { return vel_(t, x); }
    oldroyd::Mat gradient(double t, const Vec& x) const override { return grad_(t, x); }
    double boundary_excess(double t, const Vec& x) const override {
        return excess_ ? excess_(t, x) : -1.0;
    }

  private:
    int dim_;
    VelFn vel_;
    GradFn grad_;
    ExcessFn excess_;
};

struct TraceOptions {
    double eps_dom = 1e-6;  // admissible boundary overshoot of accepted samples
};

/// One characteristic, normalized to increasing time. Positions and
/// velocity-gradient samples are stored at half-step resolution; one of the
/// integration steps may be shorter when the span is not a step multiple.
struct Path {
    double t0 = 0, t1 = 0;
    double dt = 0;  // nominal full step
    std::vector<double> t;  // sample times, 2*steps + 1 of them
    std::vector<Vec> x;
    std::vector<oldroyd::Mat> grad;
    double max_excess = 0;  // worst boundary violation before projection
};

struct CharacteristicBundle {
    double t0 = 0, t1 = 0, dt = 0;
    std::vector<Path> paths;
    double max_excess = 0;
};

/// Trace a single characteristic from (t_from, seed) to t_to; t_to < t_from
/// gives the backward trace. The returned path is normalized to increasing
/// time. Throws DomainExitError when a sample exceeds eps_dom.
Path trace_one(const VelocityField& v, const Vec& seed, double t_from, double t_to,
               double dt, const TraceOptions& opt = {});

/// Forward bundle for a family of seeds.
CharacteristicBundle trace_characteristics(const VelocityField& v,
                                           std::span<const Vec> seeds, double t0,
                                           double t1, double dt,
                                           const TraceOptions& opt = {},
                                           bool parallel = true);

/// RK4 for the vectorized stress along a traced path, from path.t0 to
/// path.t1. T0 is the value at path.t0.
oldroyd::BigVec advance_stress_along_path(const oldroyd::BigVec& T0, const Path& path);

/// Exact constant-coefficient solution
///   T(t) = e^{(W-2I)t} T0 + int_0^t e^{(W-2I)(t-s)} Wvec ds
/// via one scaling-and-squaring exponential of the augmented matrix.
oldroyd::BigVec closed_form_constant_coeff(const oldroyd::BigVec& T0,
                                           const oldroyd::BigMat& W,
                                           const oldroyd::BigVec& Wvec, double t);

// ---------------------------------------------------------------------------
// field solve
// ---------------------------------------------------------------------------

/// Full d x d stress components on a structured grid of cells.
struct StressField {
    int d = 2;
    std::vector<Grid2D> comp;  // d*d grids, row-major component order

    static StressField zeros(int d, int nx, int ny);
    oldroyd::BigVec at(int i, int j) const;
    void set(int i, int j, const oldroyd::BigVec& t);
    oldroyd::Mat tensor(int i, int j) const { return oldroyd::unvec(at(i, j)); }
    int nx() const { return comp.empty() ? 0 : comp[0].nx(); }
    int ny() const { return comp.empty() ? 0 : comp[0].ny(); }
    /// max over nodes of max |T - T^T|
    double symmetry_defect() const;
};

/// Output-node layout: mapped positions of reference cell centers.
struct SoluteGrid {
    int nx = 0, ny = 0;
    std::function<Vec(double t, int i, int j)> position;
};

using StressInitFn = std::function<oldroyd::BigVec(const Vec& x_at_t0)>;

struct SoluteFieldResult {
    std::vector<StressField> series;  // one per output time
    double max_symmetry_defect = 0;
    double max_excess = 0;
};

/// Backward semi-Lagrangian field solve: per output node, backtrace to t0
/// and integrate the stress forward along the stored path. Node work is
/// independent; reductions are deterministic.
SoluteFieldResult solve_solute_field(const VelocityField& v, const SoluteGrid& grid,
                                     const StressInitFn& T0, double t0,
                                     std::span<const double> out_times, double dt,
                                     const TraceOptions& opt = {},
                                     bool parallel = true);

}  // namespace polyfsi::solute
