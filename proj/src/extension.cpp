#include "polyfsi/extension.hpp"

#include <cassert>
#include <cmath>

#include "polyfsi/shell_fft.hpp"

namespace polyfsi::ext {

using mac::FaceField;
using mac::Layout;
using mac::Metrics;

double correction(const ReferenceGeometry& geom, const ShellField& eta,
                  const ShellField& xi) {
    const MovingBoundary mb = moving_normal_and_area(geom, eta, false);
    double num = 0, den = 0;
    const int n1 = xi.n1(), n2 = xi.n2();
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const double w = mb.weight[static_cast<std::size_t>(i * n2 + j)];
            num += xi.at(i, j) * w;
            den += w;
        }
    const double floor = geom.kappa0() * static_cast<double>(n1) * n2 / 2.0;
    if (den <= floor)
        throw DegeneracyError("flux weight degenerate in the correction functional");
    return num / den;
}

SlabExtension build_extension(const Metrics& m, std::span<const double> xi_nodes,
                              const CutoffProfile& pc) {
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    assert(lay.bc == mac::BcMode::SlabWalls);
    assert(static_cast<int>(xi_nodes.size()) == nx);
    // the profile must be flat across the two face rows next to the moving
    // boundary for the trace to be exact
    if (lay.hz > -pc.flat_start() / 2.0)
        throw ConfigError("fluid grid too coarse for the extension collar");

    // corrected face datum and its cumulative integral (slab flux weight 1)
    std::vector<double> xibar(nx);
    for (int i = 0; i < nx; ++i)
        xibar[i] = 0.5 * (xi_nodes[i] + xi_nodes[(i + 1) % nx]);
    double K = 0;
    for (double v : xibar) K += v;
    K /= nx;

    std::vector<double> s(nx + 1, 0.0);
    for (int i = 0; i < nx; ++i) s[i + 1] = s[i] + lay.hx * (xibar[i] - K);

    // nodal stream function psi = -S_i * phi_c(zeta - 1)
    Grid2D psi(nx, nz + 1);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j <= nz; ++j)
            psi(i, j) = -s[i] * pc(lay.zeta_node(j) - 1.0);

    SlabExtension out;
    out.K = K;
    out.phi = FaceField::zeros(lay);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j)
            out.phi.u1(i, j) =
                (psi(i, j + 1) - psi(i, j)) / (m.zzeta_xface(i, j) * lay.hz);
    const Grid2D ubar = mac::avg_u1_to_zface(m, out.phi.u1);
    for (int i = 0; i < nx; ++i) {
        const int i1 = (i + 1) % nx;
        for (int j = 0; j <= nz; ++j)
            out.phi.u2(i, j) = -(psi(i1, j) - psi(i, j)) / lay.hx +
                               m.zxi_zface(i, j) * ubar(i, j);
    }
    return out;
}

std::vector<double> extension_transpose(const Metrics& m, const FaceField& res,
                                        const CutoffProfile& pc) {
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;

    // step 8 transpose: u2 = -dxi(psi)/hx + zxi * ubar
    Grid2D gpsi(nx, nz + 1, 0.0);
    Grid2D gubar(nx, nz + 1, 0.0);
    for (int i = 0; i < nx; ++i) {
        const int i1 = (i + 1) % nx;
        for (int j = 0; j <= nz; ++j) {
            const double g = res.u2(i, j);
            gpsi(i1, j) -= g / lay.hx;
            gpsi(i, j) += g / lay.hx;
            gubar(i, j) += m.zxi_zface(i, j) * g;
        }
    }
    // step 7 transpose: ubar = avg(u1)
    Grid2D gu1 = mac::avg_u1_to_zface_transpose(m, gubar);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) gu1(i, j) += res.u1(i, j);
    // step 6 transpose: u1 = dzeta(psi) / (zzeta hz)
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) {
            const double g = gu1(i, j) / (m.zzeta_xface(i, j) * lay.hz);
            gpsi(i, j + 1) += g;
            gpsi(i, j) -= g;
        }
    // step 5 transpose: psi(i,j) = -S_i * phi_c(zeta_j - 1)
    std::vector<double> gs(nx + 1, 0.0);
    for (int i = 0; i < nx; ++i) {
        double acc = 0;
        for (int j = 0; j <= nz; ++j) acc += pc(lay.zeta_node(j) - 1.0) * gpsi(i, j);
        gs[i] = -acc;
    }
    // step 4 transpose: S_{i+1} = S_i + hx c_i  =>  gc_i = hx * sum_{i' > i} gS_{i'}
    std::vector<double> gc(nx, 0.0);
    double suffix = 0;
    for (int i = nx - 1; i >= 0; --i) {
        suffix += gs[i + 1];
        gc[i] = lay.hx * suffix;
    }
    // step 3 transpose: c = xibar - mean(xibar)
    double mean_gc = 0;
    for (double v : gc) mean_gc += v;
    mean_gc /= nx;
    // step 2/1 transpose: xibar_i = (xi_i + xi_{i+1}) / 2
    std::vector<double> gxi(nx, 0.0);
    for (int i = 0; i < nx; ++i) {
        const double g = gc[i] - mean_gc;
        gxi[i] += 0.5 * g;
        gxi[(i + 1) % nx] += 0.5 * g;
    }
    return gxi;
}

CutoffProfile extension_profile(const ReferenceGeometry& geom) {
    // the lift must vanish outside the inner tube of half-width ell; a wide
    // flat collar keeps the boundary trace exact on affordable grids
    return CutoffProfile(geom.ell(), -1.0, 0.5);
}

ExtensionField solenoidal_extension(const ReferenceGeometry& geom,
                                    const ShellField& eta, const ShellField& xi,
                                    int nx, int nz) {
    assert(geom.kind() == GeomKind::FlatSlab2D);
    auto rep = check_nondegeneracy(geom, eta);
    if (!rep.ok) throw DegeneracyError("extension requested on degenerate geometry");

    ExtensionField out;
    out.lay = Layout::make(nx, nz, mac::BcMode::SlabWalls);
    const int M = geom.shell_n();
    std::span<const double> eta_span(eta.g.data(), static_cast<std::size_t>(M));
    std::span<const double> xi_span(xi.g.data(), static_cast<std::size_t>(M));
    const std::vector<double> eta_f = sfft::resample_1d(eta_span, nx);
    const std::vector<double> xi_f = sfft::resample_1d(xi_span, nx);
    out.metrics = Metrics::from_displacement(out.lay, eta_f, geom.cutoff());
    auto built = build_extension(out.metrics, xi_f, extension_profile(geom));
    out.phi = std::move(built.phi);
    out.K = built.K;
    return out;
}

// ---------------------------------------------------------------------------
// 3d slab smoke variant
// ---------------------------------------------------------------------------

Extension3D solenoidal_extension_3d(const Grid2D& xi, int nz, double L) {
    const int n = xi.nx();
    assert(xi.ny() == n);
    const double hx = 2.0 * M_PI / n, hz = 1.0 / nz;
    const CutoffProfile pc(L);
    assert(hz <= L / 8.0);

    Extension3D e;
    e.n = n;
    e.nz = nz;
    e.u1.assign(static_cast<std::size_t>(n) * n * nz, 0.0);
    e.u2.assign(static_cast<std::size_t>(n) * n * nz, 0.0);
    e.u3.assign(static_cast<std::size_t>(n) * n * (nz + 1), 0.0);

    // corrected datum at the shell nodes
    Grid2D c(n, n);
    double K = 0;
    for (std::size_t k = 0; k < xi.size(); ++k) K += xi.data()[k];
    K /= static_cast<double>(n) * n;
    e.K = K;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c(i, j) = xi(i, j) - K;

    // auxiliary Poisson solve on the shell: lap(chi) = c, mean zero
    std::vector<std::complex<double>> ch;
    sfft::forward_2d(c, ch);
    const int nb = n / 2 + 1;
    for (int k0 = 0; k0 < n; ++k0)
        for (int k1 = 0; k1 < nb; ++k1) {
            const int w0 = k0 <= n / 2 ? k0 : k0 - n;
            const double k2 = static_cast<double>(w0) * w0 + static_cast<double>(k1) * k1;
            auto& z = ch[static_cast<std::size_t>(k0) * nb + k1];
            z = (k2 == 0) ? 0.0 : z / (-k2);
        }
    Grid2D chi(n, n);
    sfft::backward_2d(ch, chi);

    // vector potential A = (-d2 chi, d1 chi, 0) * phi_c(z - 1) sampled on
    // edges; faces are curl differences, divergence-free by the mimetic
    // identity. A1 lives on x-edges (i+1/2, j, k), A2 on y-edges
    // (i, j+1/2, k).
    const Grid2D d1 = sfft::derivative_2d(chi, 1, 0);
    const Grid2D d2 = sfft::derivative_2d(chi, 0, 1);
    auto A1 = [&](int i, int j, int k) {  // x-edge (i+1/2, j, k)
        const double a = -0.5 * (d2(i, j) + d2((i + 1) % n, j));
        return a * pc(k * hz - 1.0);
    };
    auto A2 = [&](int i, int j, int k) {  // y-edge (i, j+1/2, k)
        const double a = 0.5 * (d1(i, j) + d1(i, (j + 1) % n));
        return a * pc(k * hz - 1.0);
    };

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < nz; ++k) {
                // u1 = -dA2/dz at (i, j+1/2, k+1/2)
                e.u1[e.idx(i, j, k, nz)] = -(A2(i, j, k + 1) - A2(i, j, k)) / hz;
                // u2 = dA1/dz at (i+1/2, j, k+1/2)
                e.u2[e.idx(i, j, k, nz)] = (A1(i, j, k + 1) - A1(i, j, k)) / hz;
            }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k <= nz; ++k) {
                // u3 = dA2/dx - dA1/dy at (i+1/2, j+1/2, k)
                const double da2 = (A2((i + 1) % n, j, k) - A2(i, j, k)) / hx;
                const double da1 = (A1(i, (j + 1) % n, k) - A1(i, j, k)) / hx;
                e.u3[e.idx(i, j, k, nz + 1)] = da2 - da1;
            }

    // diagnostics: divergence and trace
    double dmax = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < nz; ++k) {
                const double div =
                    (e.u1[e.idx((i + 1) % n, j, k, nz)] - e.u1[e.idx(i, j, k, nz)]) / hx +
                    (e.u2[e.idx(i, (j + 1) % n, k, nz)] - e.u2[e.idx(i, j, k, nz)]) / hx +
                    (e.u3[e.idx(i, j, k + 1, nz + 1)] - e.u3[e.idx(i, j, k, nz + 1)]) / hz;
                dmax = std::max(dmax, std::abs(div));
            }
    e.max_divergence = dmax;
    double terr = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int i1 = (i + 1) % n, j1 = (j + 1) % n;
            const double cc =
                0.25 * (c(i, j) + c(i1, j) + c(i, j1) + c(i1, j1));  // at the face center
            terr = std::max(terr, std::abs(e.u3[e.idx(i, j, nz, nz + 1)] - cc));
        }
    e.trace_error = terr;
    return e;
}

}  // namespace polyfsi::ext
