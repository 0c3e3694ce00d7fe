/// @file io.hpp
/// @brief Bit-specified run outputs: legacy ASCII structured-grid snapshots
///        with mapped point coordinates, shell CSVs, and the ledger CSVs.
///        All floats print with 17 significant digits; identical inputs give
///        byte-identical files.

#pragma once

#include <string>
#include <vector>

#include "polyfsi/coupling.hpp"

namespace polyfsi::io {

std::string g17(double v);

/// Snapshot of one time level: velocity vectors, pressure, stress components
/// and the conformation eigenvalue floor, on mapped cell centers.
void write_snapshot(const std::string& path, const mac::Metrics& m,
                    const mac::FaceField& u, const Grid2D& p,
                    const solute::StressField& t, double time);

/// Shell displacement and velocity as CSV (y, eta, eta_t).
void write_shell_csv(const std::string& path, std::span<const double> eta,
                     std::span<const double> eta_t);

struct Snapshot {
    int nx = 0, nz = 0;
    double time = 0;
    std::vector<double> px, pz;
    std::vector<double> u1, u2, p;
    std::vector<std::vector<double>> stress;  // component arrays
    std::vector<double> conf_eig;
};
/// Reader for the snapshot format above (round-trip checks, postprocessing).
Snapshot read_snapshot(const std::string& path);

void write_energy_csv(const std::string& path,
                      const std::vector<ss::StepLedger>& ledgers);
void write_fixedpoint_csv(const std::string& path,
                          const std::vector<coupling::FpRow>& rows);
void write_norms_csv(const std::string& path,
                     const std::vector<std::pair<double, std::vector<diag::NormRow>>>&
                         per_time_rows);
void write_summary_csv(const std::string& path, const coupling::Trajectory& traj);

}  // namespace polyfsi::io
