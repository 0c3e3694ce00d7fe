#include "polyfsi/diagnostics.hpp"

#include <cassert>
#include <cmath>

#include "polyfsi/geometry.hpp"
#include "polyfsi/shell_fft.hpp"

namespace polyfsi::diag {

using mac::FaceField;
using mac::Layout;
using mac::Metrics;

double min_eig_sym(const oldroyd::Mat& s) {
    const int d = static_cast<int>(s.rows());
    if (d == 1) return s(0, 0);
    if (d == 2) {
        const double tr = s(0, 0) + s(1, 1);
        const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
        const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
        return 0.5 * tr - disc;
    }
    // symmetric 3x3: trigonometric closed form
    const double q = (s(0, 0) + s(1, 1) + s(2, 2)) / 3.0;
    oldroyd::Mat b = s;
    for (int i = 0; i < 3; ++i) b(i, i) -= q;
    const double p2 = (b.array() * b.array()).sum() / 6.0;
    const double p = std::sqrt(p2);
    if (p < 1e-300) return q;
    const double detb = b.determinant() / (p * p * p);
    const double phi = std::acos(std::clamp(0.5 * detb, -1.0, 1.0)) / 3.0;
    // eigenvalues q + 2p cos(phi + 2k pi/3); the smallest uses k = 1 shift
    return q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
}

SpdReport spd_monitor(const solute::StressField& t) {
    SpdReport rep;
    rep.min_eig = 1e300;
    const int nx = t.nx(), ny = t.ny();
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            oldroyd::Mat m = t.tensor(i, j);
            oldroyd::Mat sym = 0.5 * (m + m.transpose());
            for (int k = 0; k < t.d; ++k) sym(k, k) += 1.0;
            const double ev = min_eig_sym(sym);
            if (ev < rep.min_eig) {
                rep.min_eig = ev;
                rep.i = i;
                rep.j = j;
            }
        }
    return rep;
}

void cell_gradient(const Metrics& m, const Grid2D& c, Grid2D& dx, Grid2D& dz) {
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    dx = Grid2D(nx, nz);
    dz = Grid2D(nx, nz);
    auto dzeta = [&](int i, int j) {
        if (j == 0) return (-1.5 * c(i, 0) + 2.0 * c(i, 1) - 0.5 * c(i, 2)) / lay.hz;
        if (j == nz - 1)
            return (1.5 * c(i, nz - 1) - 2.0 * c(i, nz - 2) + 0.5 * c(i, nz - 3)) /
                   lay.hz;
        return (c(i, j + 1) - c(i, j - 1)) / (2.0 * lay.hz);
    };
    for (int i = 0; i < nx; ++i) {
        const int ip = (i + 1) % nx, im = (i + nx - 1) % nx;
        for (int j = 0; j < nz; ++j) {
            const double dxi = (c(ip, j) - c(im, j)) / (2.0 * lay.hx);
            const double dzt = dzeta(i, j);
            const int j1 = j + 1;
            const double zxic = 0.5 * (m.zxi_zface(i, j) + m.zxi_zface(i, j1));
            const double jc = m.jac_cell(i, j);
            dx(i, j) = dxi - zxic / jc * dzt;
            dz(i, j) = dzt / jc;
        }
    }
}

double cell_l2(const Metrics& m, const Grid2D& c) {
    const Layout& lay = m.lay;
    double s = 0;
    for (int i = 0; i < lay.nx; ++i)
        for (int j = 0; j < lay.nz; ++j)
            s += c(i, j) * c(i, j) * m.jac_cell(i, j) * lay.hx * lay.hz;
    return std::sqrt(s);
}

double cell_sobolev(const Metrics& m, const Grid2D& c, int k) {
    assert(k >= 0 && k <= 3);
    double acc = std::pow(cell_l2(m, c), 2);
    std::vector<Grid2D> level{c};
    for (int order = 1; order <= k; ++order) {
        std::vector<Grid2D> next;
        for (const auto& g : level) {
            Grid2D dx, dz;
            cell_gradient(m, g, dx, dz);
            acc += std::pow(cell_l2(m, dx), 2) + std::pow(cell_l2(m, dz), 2);
            next.push_back(std::move(dx));
            next.push_back(std::move(dz));
        }
        level = std::move(next);
    }
    return std::sqrt(acc);
}

double stress_l2(const Metrics& m, const solute::StressField& t) {
    double acc = 0;
    for (const auto& c : t.comp) acc += std::pow(cell_l2(m, c), 2);
    return std::sqrt(acc);
}

double stress_sobolev(const Metrics& m, const solute::StressField& t, int k) {
    double acc = 0;
    for (const auto& c : t.comp) acc += std::pow(cell_sobolev(m, c, k), 2);
    return std::sqrt(acc);
}

std::vector<NormRow> norm_suite(const Metrics& m, const FaceField& u, const Grid2D& p,
                                std::span<const double> eta,
                                std::span<const double> eta_t) {
    std::vector<NormRow> rows;
    // shell: L2 plus pure-derivative seminorms (spectral) and full norms
    rows.push_back({"eta", "L2", sfft::l2_norm_1d(eta)});
    for (int k = 1; k <= 6; ++k)
        rows.push_back({"eta", "D" + std::to_string(k), sfft::seminorm_1d(eta, k)});
    for (int k = 1; k <= 6; ++k)
        rows.push_back({"eta", "W" + std::to_string(k) + "2", sfft::sobolev_norm_1d(eta, k)});
    rows.push_back({"eta_t", "L2", sfft::l2_norm_1d(eta_t)});
    for (int k = 1; k <= 3; ++k)
        rows.push_back(
            {"eta_t", "W" + std::to_string(k) + "2", sfft::sobolev_norm_1d(eta_t, k)});

    // fluid: cell-centered components
    Grid2D c1, c2;
    mac::face_to_center(m, u, mac::WallTraces::zeros(m.lay.nx), c1, c2);
    for (int k = 0; k <= 3; ++k) {
        rows.push_back({"u1", "W" + std::to_string(k) + "2", cell_sobolev(m, c1, k)});
        rows.push_back({"u2", "W" + std::to_string(k) + "2", cell_sobolev(m, c2, k)});
    }
    for (int k = 0; k <= 3; ++k)
        rows.push_back({"p", "W" + std::to_string(k) + "2", cell_sobolev(m, p, k)});
    return rows;
}

double domain_volume(const Metrics& m) { return m.volume(); }

double boundary_flux_rate(const ReferenceGeometry& geom, const ShellField& eta,
                          const ShellField& eta_t) {
    const MovingBoundary mb = moving_normal_and_area(geom, eta, false);
    double s = 0;
    const int n1 = eta.n1(), n2 = eta.n2();
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            s += eta_t.at(i, j) * mb.weight[static_cast<std::size_t>(i * n2 + j)];
    return s * geom.shell_cell_measure();
}

}  // namespace polyfsi::diag
