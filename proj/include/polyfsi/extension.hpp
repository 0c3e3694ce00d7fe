/// @file extension.hpp
/// @brief Divergence-free lift of shell-normal boundary data into the tube,
///        with the scalar flux correction that makes the lift possible.
///
/// In 2d the lift is the perpendicular gradient of a nodal stream function
/// psi(i,j) = -S_i * phi_c(zeta_j - 1), S the cumulative integral of the
/// corrected datum, evaluated through the flux identities of the staggered
/// grid; its discrete divergence vanishes identically and its boundary trace
/// is (xi - K) n exactly at the face samples. The 3d slab variant (smoke
/// tests only) lifts a vector potential built from an auxiliary spectral
/// Poisson solve on the shell.

#pragma once

#include <span>
#include <vector>

#include "polyfsi/geometry.hpp"
#include "polyfsi/mac_grid.hpp"

namespace polyfsi::ext {

/// Weighted-mean flux correction: K(xi) = int xi w / int w with the moving
/// flux weight w = (n . n_eta) a_eta. Zero exactly for data with vanishing
/// moving-boundary flux. Throws DegeneracyError on a collapsed denominator.
double correction(const ReferenceGeometry& geom, const ShellField& eta,
                  const ShellField& xi);

/// Vertical profile of the lift: supported in the inner tube of half-width
/// ell, flat near the boundary.
CutoffProfile extension_profile(const ReferenceGeometry& geom);

/// Lift on existing slab metrics; the datum is sampled on the fluid xi
/// columns (nodes), the profile shapes the vertical decay. Trace rows of
/// phi.u2 carry the corrected datum. Throws ConfigError when the grid
/// cannot resolve the flat collar of the profile.
struct SlabExtension {
    mac::FaceField phi;
    double K = 0;
};
SlabExtension build_extension(const mac::Metrics& m, std::span<const double> xi_nodes,
                              const CutoffProfile& pc);

/// Plain-pairing transpose of the xi -> phi map of build_extension:
/// < build_extension(xi).phi , res > = < xi , extension_transpose(res) >.
std::vector<double> extension_transpose(const mac::Metrics& m,
                                        const mac::FaceField& res,
                                        const CutoffProfile& pc);

/// Stand-alone operation on shell-grid data (slab geometries): resamples the
/// datum to a fluid grid of the requested size and builds the lift there.
struct ExtensionField {
    mac::Layout lay;
    mac::Metrics metrics;
    mac::FaceField phi;
    double K = 0;
};
ExtensionField solenoidal_extension(const ReferenceGeometry& geom,
                                    const ShellField& eta, const ShellField& xi,
                                    int nx, int nz);

// ---------------------------------------------------------------------------
// 3d slab variant (coarse smoke tests)
// ---------------------------------------------------------------------------

/// Minimal 3d staggered box [0,2pi)^2 x (0,1), reference metrics.
struct Extension3D {
    int n = 0, nz = 0;             // horizontal cells per axis, vertical cells
    std::vector<double> u1;        // (n, n, nz)   x-faces
    std::vector<double> u2;        // (n, n, nz)   y-faces
    std::vector<double> u3;        // (n, n, nz+1) z-faces
    double K = 0;
    double max_divergence = 0;     // filled by the builder
    double trace_error = 0;        // max |u3_top - (xi - K)|
    std::size_t idx(int i, int j, int k, int kdim) const {
        return (static_cast<std::size_t>(i) * n + j) * kdim + k;
    }
};
/// xi sampled on the (n x n) shell nodes.
Extension3D solenoidal_extension_3d(const Grid2D& xi, int nz, double L);

}  // namespace polyfsi::ext
