/// @file geometry.hpp
/// @brief Reference configurations, the moving-boundary parametrization, and
///        the tube transform between reference and deformed domains.
///
/// Two instances are provided: a tangentially periodic slab [0,2pi)^(d-1) x
/// (0,1) with a flexible top and rigid bottom, and the unit disk with a
/// flexible circular boundary. Displacement acts along the reference normal
/// inside a tube of half-width L and is faded out by a cutoff profile.

#pragma once

#include <vector>

#include "polyfsi/core.hpp"
#include "polyfsi/cutoff.hpp"
#include "polyfsi/oldroyd.hpp"

namespace polyfsi {

enum class GeomKind { FlatSlab2D, FlatSlab3D, Annulus2D };

class ReferenceGeometry;

/// Scalar field on the periodic shell grid. For d = 2 the grid is M x 1,
/// for the 3d slab it is M x M.
struct ShellField {
    Grid2D g;

    static ShellField zeros(int n1, int n2 = 1) { return {Grid2D(n1, n2, 0.0)}; }

    double& at(int i, int j = 0) { return g(i, j); }
    double at(int i, int j = 0) const { return g(i, j); }
    int n1() const { return g.nx(); }
    int n2() const { return g.ny(); }

    double max_abs() const { return par::det_max_abs(g.span()); }
    double mean() const { return par::det_sum_serial(g.span()) / static_cast<double>(g.size()); }
};

class ReferenceGeometry {
  public:
    static ReferenceGeometry flat_slab_2d(int shell_n, double L = 0.5,
                                          double ell = 0.15, double kappa0 = 0.5);
    static ReferenceGeometry flat_slab_3d(int shell_n, double L = 0.5,
                                          double ell = 0.15, double kappa0 = 0.5);
    static ReferenceGeometry annulus_2d(int shell_n, double L = 0.5,
                                        double ell = 0.15, double kappa0 = 0.5);

    GeomKind kind() const { return kind_; }
    int dim() const { return dim_; }
    int shell_n() const { return shell_n_; }
    double shell_h() const { return 2.0 * M_PI / shell_n_; }
    double shell_coord(int i) const { return i * shell_h(); }
    /// Number of shell nodes (M or M^2).
    int shell_size() const { return dim_ == 3 ? shell_n_ * shell_n_ : shell_n_; }
    /// Measure of one shell cell in the reference chart.
    double shell_cell_measure() const {
        return dim_ == 3 ? shell_h() * shell_h() : shell_h();
    }

    double L() const { return L_; }
    double ell() const { return ell_; }
    double kappa0() const { return kappa0_; }
    const CutoffProfile& cutoff() const { return cutoff_; }

    /// Chart point phi(y) on the reference boundary.
    Vec chart(double y1, double y2 = 0.0) const;
    /// Outward unit normal n(y).
    Vec normal(double y1, double y2 = 0.0) const;

    struct FootPoint {
        double y1 = 0, y2 = 0;  // shell coordinates of the projection
        double s = 0;           // signed normal coordinate, 0 on the boundary
        bool in_tube = false;   // s > -L
    };
    /// Foot-point decomposition of an ambient point (slab: vertical
    /// projection, disk: angular projection).
    FootPoint foot_point(const Vec& x) const;

    ShellField zero_shell_field() const {
        return ShellField::zeros(shell_n_, dim_ == 3 ? shell_n_ : 1);
    }

  private:
    ReferenceGeometry(GeomKind kind, int dim, int shell_n, double L, double ell,
                      double kappa0);

    GeomKind kind_;
    int dim_;
    int shell_n_;
    double L_, ell_, kappa0_;
    CutoffProfile cutoff_;
};

/// phi_eta(y) = phi(y) + n(y) eta(y) at grid node (i, j).
Vec boundary_point(const ReferenceGeometry& geom, const ShellField& eta, int i,
                   int j = 0);

/// Deformed-boundary normals and area elements from spectral shell
/// derivatives. Orientation is outward (positive against the reference
/// normal).
struct MovingBoundary {
    std::vector<Vec> n_eta;       // per node, row-major
    std::vector<double> a_eta;    // per node
    std::vector<double> weight;   // (n . n_eta) a_eta, the moving flux weight
    double min_area = 0;
    double min_orientation = 0;  // min over nodes of n . n_eta
};
MovingBoundary moving_normal_and_area(const ReferenceGeometry& geom,
                                      const ShellField& eta,
                                      bool enforce_floor = true);

struct NondegeneracyReport {
    bool ok = false;
    double min_area = 0;
    double max_disp = 0;
};
NondegeneracyReport check_nondegeneracy(const ReferenceGeometry& geom,
                                        const ShellField& eta);

/// Solve s + eta * phi_c(s) = s_hat by a safeguarded Newton iteration;
/// monotone while |eta| sup|phi_c'| < 1. Throws ConvergenceError past the
/// 50-iteration budget (slope near degeneracy).
double invert_normal_offset(const CutoffProfile& pc, double eta, double s_hat);

/// Tube transform for a fixed displacement sample. Immutable once built;
/// evaluation is pure and concurrency-safe. Rebuild for a new displacement.
class HanzawaMap {
  public:
    /// Throws DegeneracyError when max |eta| exceeds the admissible bound.
    HanzawaMap(const ReferenceGeometry& geom, ShellField eta);

    const ReferenceGeometry& geom() const { return *geom_; }
    const ShellField& eta() const { return eta_; }

    /// Displacement at arbitrary shell coordinates (cubic interpolation of
    /// the grid samples; exact at nodes).
    double eta_at(double y1, double y2 = 0.0) const;
    double eta_deriv_at(double y1, double y2 = 0.0, int axis = 0) const;

    /// x + n(y(x)) eta(y(x)) phi_c(s(x)); identity outside the tube.
    Vec forward(const Vec& x) const;

    /// Exact inverse by a safeguarded 1d root solve in the normal
    /// coordinate. Throws ConvergenceError past the iteration budget.
    Vec inverse(const Vec& xhat) const;

    /// Analytic gradient of the forward map.
    oldroyd::Mat jacobian(const Vec& x) const;

    /// Positive when the physical point lies outside the moving domain on
    /// the flexible side; measured in the normal coordinate.
    double boundary_excess(const Vec& xhat) const;

    /// sup-norm of Psi_{-eta}(Psi_eta(x)) - x over a probe grid; the naive
    /// sign-flip inverse is exact only where the cutoff is constant.
    double naive_inverse_defect() const;

  private:
    const ReferenceGeometry* geom_;
    ShellField eta_;
    double max_disp_;
};

}  // namespace polyfsi
