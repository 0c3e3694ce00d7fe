/// @file diagnostics.hpp
/// @brief Runtime verification ledger: discrete Sobolev norms, conformation
///        positivity, energy bookkeeping, volume consistency.
///
/// Norms are reproducible grid analogs: spectral weights on the shell,
/// mapped finite differences with the Jacobian as measure weight in the
/// fluid. Diagnostics never feed back into the solvers.

#pragma once

#include <string>
#include <vector>

#include "polyfsi/geometry.hpp"
#include "polyfsi/mac_grid.hpp"
#include "polyfsi/oldroyd.hpp"
#include "polyfsi/solute.hpp"

namespace polyfsi::diag {

/// Smallest eigenvalue of a symmetric d x d matrix (d <= 3, closed form).
double min_eig_sym(const oldroyd::Mat& s);

struct SpdReport {
    double min_eig = 0;  // of T + I over all nodes
    int i = 0, j = 0;    // location of the minimum
};
/// Conformation positivity monitor for a stress field (symmetrized).
SpdReport spd_monitor(const solute::StressField& t);

/// First derivatives of a cell field in physical coordinates (one-sided at
/// the walls).
void cell_gradient(const mac::Metrics& m, const Grid2D& c, Grid2D& dx, Grid2D& dz);

/// Jacobian-weighted L2 norm of a cell field.
double cell_l2(const mac::Metrics& m, const Grid2D& c);

/// Full discrete W^{k,2} norm of a cell field, k <= 3.
double cell_sobolev(const mac::Metrics& m, const Grid2D& c, int k);

/// Frobenius L2 norm of a stress field over the mapped domain.
double stress_l2(const mac::Metrics& m, const solute::StressField& t);

/// Sum over components of the W^{k,2} norms (squared-summed).
double stress_sobolev(const mac::Metrics& m, const solute::StressField& t, int k);

struct NormRow {
    std::string field;
    std::string norm;
    double value = 0;
};

/// Labeled norm table: shell displacement/velocity up to order 6 (spectral),
/// fluid velocity components and pressure up to W^{3,2} (mapped FD).
std::vector<NormRow> norm_suite(const mac::Metrics& m, const mac::FaceField& u,
                                const Grid2D& p, std::span<const double> eta,
                                std::span<const double> eta_t);

/// Moving-domain volume from the metrics and the shell-side flux rate; the
/// two time histories agree within scheme order (transport identity).
double domain_volume(const mac::Metrics& m);
double boundary_flux_rate(const ReferenceGeometry& geom, const ShellField& eta,
                          const ShellField& eta_t);

}  // namespace polyfsi::diag
