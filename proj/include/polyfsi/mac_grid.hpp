/// @file mac_grid.hpp
/// @brief Staggered reference grid for the slab and the mapped finite
///        difference operators on it.
///
/// Reference box [0,2pi) x (0,1), periodic in xi. Variables:
///   u1 at x-faces   (xi_i,     zeta_{j+1/2})  -- nx x nz
///   u2 at z-faces   (xi_{i+1/2}, zeta_j)      -- nx x (nz+1); rows 0 and nz
///                                                are wall values (data, not
///                                                unknowns, in wall mode)
///   p  at centers   (xi_{i+1/2}, zeta_{j+1/2}) -- nx x nz
///
/// The deformed geometry enters through metric factors derived from finite
/// differences of the node heights Z(i,j). All transport is written against
/// the volume fluxes
///   Fxi  = Zzeta * u1 * hz          (through x-faces)
///   Fzeta = (u2 - Zxi * avg(u1)) hx (through z-faces)
/// so that div sums telescope exactly: a nodal stream function generates an
/// exactly divergence-free face field, and the time increment of the cell
/// Jacobians equals the mesh-flux divergence (discrete geometric
/// conservation).
///
/// The pressure gradient is the negative transpose of the flux divergence
/// against the face volume weights, and the viscous operator is assembled
/// as strain^T * quadrature * strain. Both identities are what the energy
/// ledger relies on, and both are unit-tested to roundoff.

#pragma once

#include <vector>

#include "polyfsi/core.hpp"
#include "polyfsi/cutoff.hpp"

namespace polyfsi::mac {

enum class BcMode {
    SlabWalls,  // rigid bottom, flexible top; tangential wall traces are data
    Periodic    // doubly periodic box (identity metrics only; test mode)
};

struct Layout {
    int nx = 0, nz = 0;
    BcMode bc = BcMode::SlabWalls;
    double hx = 0, hz = 0;

    static Layout make(int nx, int nz, BcMode bc) {
        return {nx, nz, bc, 2.0 * M_PI / nx, 1.0 / nz};
    }
    int u2_rows() const { return bc == BcMode::SlabWalls ? nz + 1 : nz; }
    double xi_node(int i) const { return i * hx; }
    double xi_center(int i) const { return (i + 0.5) * hx; }
    double zeta_node(int j) const { return j * hz; }
    double zeta_center(int j) const { return (j + 0.5) * hz; }
};

/// Cartesian face velocities (or any face-sited vector quantity).
struct FaceField {
    Grid2D u1;  // (nx, nz)
    Grid2D u2;  // (nx, u2_rows)

    static FaceField zeros(const Layout& lay) {
        return {Grid2D(lay.nx, lay.nz, 0.0), Grid2D(lay.nx, lay.u2_rows(), 0.0)};
    }
    void fill(double v) {
        u1.fill(v);
        u2.fill(v);
    }
    void axpy(double a, const FaceField& o) {
        for (std::size_t k = 0; k < u1.size(); ++k) u1.data()[k] += a * o.u1.data()[k];
        for (std::size_t k = 0; k < u2.size(); ++k) u2.data()[k] += a * o.u2.data()[k];
    }
    void scale(double a) {
        for (std::size_t k = 0; k < u1.size(); ++k) u1.data()[k] *= a;
        for (std::size_t k = 0; k < u2.size(); ++k) u2.data()[k] *= a;
    }
};

/// Tangential wall traces of u1 (needed by strain and convection stencils).
struct WallTraces {
    std::vector<double> u1_bottom, u1_top;  // nx values each

    static WallTraces zeros(int nx) {
        return {std::vector<double>(nx, 0.0), std::vector<double>(nx, 0.0)};
    }
};

/// Metric factors of the vertical shear map x = (xi, Z(xi, zeta)), all from
/// node differences of Z.
struct Metrics {
    Layout lay;
    Grid2D z_node;        // (nx, nz+1) node heights
    Grid2D zzeta_xface;   // (nx, nz)   dZ/dzeta at x-faces
    Grid2D zxi_zface;     // (nx, nz+1) dZ/dxi at z-faces
    Grid2D jac_cell;      // (nx, nz)   cell Jacobian (avg of x-face zzeta)
    Grid2D zzeta_node;    // (nx, nz+1) dZ/dzeta at nodes (one-sided at walls)
    bool identity = true;

    static Metrics identity_box(const Layout& lay);
    /// Slab metrics from a displacement sample on the fluid xi-columns and a
    /// cutoff profile in zeta (Z = zeta + eta(xi) * phi_c(zeta - 1)).
    static Metrics from_displacement(const Layout& lay,
                                     std::span<const double> eta_at_nodes,
                                     const CutoffProfile& pc);

    double volume() const;  // total mapped volume
};

// ---------------------------------------------------------------------------
// canonical interpolations
// ---------------------------------------------------------------------------

/// u1 averaged to z-faces (4-point; one-sided extrapolation at the top wall,
/// unused at the flat bottom). The same operator everywhere keeps the
/// flux/velocity conversions exactly consistent.
Grid2D avg_u1_to_zface(const Metrics& m, const Grid2D& u1);

/// Exact transpose of avg_u1_to_zface (z-face weights scattered to u1).
Grid2D avg_u1_to_zface_transpose(const Metrics& m, const Grid2D& zf);

/// Cell-centered components of a face field.
void face_to_center(const Metrics& m, const FaceField& u, const WallTraces& tr,
                    Grid2D& c1, Grid2D& c2);

// ---------------------------------------------------------------------------
// fluxes, divergence, dual gradient
// ---------------------------------------------------------------------------

Grid2D flux_xi(const Metrics& m, const FaceField& u);    // (nx, nz)
Grid2D flux_zeta(const Metrics& m, const FaceField& u);  // (nx, u2_rows)

/// Per-cell flux divergence  Fxi(i+1,.) - Fxi(i,.) + Fzeta(.,j+1) - Fzeta(.,j)
/// (volume rate; divide by jac*hx*hz for the pointwise divergence).
Grid2D div_flux(const Metrics& m, const FaceField& u);

/// Physical divergence max norm (diagnostic).
double max_divergence(const Metrics& m, const FaceField& u);

/// Face volume weights (the momentum mass matrix diagonal). Wall rows of u2
/// carry their half-cell volume.
FaceField face_volumes(const Metrics& m);

/// Dual pressure gradient: G q = -M^{-1} D^T q against plain cell pairing,
/// so that <M G q, v> = -<q, div_flux v> for all face fields v with zero
/// wall-normal entries. Wall rows of the result are zero.
FaceField grad_dual(const Metrics& m, const Grid2D& q);

// ---------------------------------------------------------------------------
// strain and the viscous form
// ---------------------------------------------------------------------------

/// Symmetric-gradient samples: d11, d22 at cells; d12 at nodes
/// (nx x (nz+1), wall rows use the trace data).
struct StrainSamples {
    Grid2D d11, d22;  // (nx, nz)
    Grid2D d12;       // (nx, nz+1)
};

StrainSamples strain(const Metrics& m, const FaceField& u, const WallTraces& tr);

/// Quadrature value of 2 int D(u):D(v) dx (Jacobian-weighted, half weights
/// for wall-node rows of d12).
double strain_form(const Metrics& m, const StrainSamples& a, const StrainSamples& b);

/// A u = strain^T W strain u (2x), returned with boundary-row entries filled
/// so that <apply_viscous(u), v> equals strain_form(strain u, strain v) for
/// any v including wall values. DOF rows are the operator used by the
/// implicit solve.
FaceField apply_viscous(const Metrics& m, const FaceField& u, const WallTraces& tr);

/// Dissipation 2 ||D(u)||^2 with the same quadrature.
double dissipation(const Metrics& m, const FaceField& u, const WallTraces& tr);

// ---------------------------------------------------------------------------
// convection (divergence form on shifted control volumes)
// ---------------------------------------------------------------------------

/// Momentum flux divergence of u advected by the volume fluxes (fxi, fzeta).
/// Centered interpolants; exactly energy-neutral when the advecting fluxes
/// are divergence-free with no boundary flux. Result carries face-volume
/// scaling already removed (i.e. it is the tendency du/dt contribution).
FaceField convect(const Metrics& m, const Grid2D& fxi, const Grid2D& fzeta,
                  const FaceField& u, const WallTraces& tr);

/// Raw form residual of convection (volume-weighted, including wall rows of
/// u2); convect() equals this divided by face volumes on DOF rows.
FaceField convect_weighted(const Metrics& m, const Grid2D& fxi, const Grid2D& fzeta,
                           const FaceField& u, const WallTraces& tr);

// ---------------------------------------------------------------------------
// gradients / stress divergence at faces
// ---------------------------------------------------------------------------

/// Velocity gradient tensor at cell centers, entries (i,j) = dv_i/dx_j in
/// physical coordinates.
struct CenterGradient {
    Grid2D g11, g12, g21, g22;
};
CenterGradient velocity_gradient(const Metrics& m, const FaceField& u,
                                 const WallTraces& tr);

/// Divergence of a symmetric cell-centered tensor (t11, t12, t22) evaluated
/// at faces, in physical coordinates. One-sided closures at the walls.
FaceField div_cell_tensor(const Metrics& m, const Grid2D& t11, const Grid2D& t12,
                          const Grid2D& t22);

double inner(const FaceField& w, const FaceField& a, const FaceField& b);

}  // namespace polyfsi::mac
