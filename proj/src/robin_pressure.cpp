#include "polyfsi/robin_pressure.hpp"

#include <cassert>
#include <cmath>

namespace polyfsi::robin {

using mac::FaceField;
using mac::Layout;
using mac::Metrics;

std::vector<double> top_area_element(const Metrics& m) {
    const Layout& lay = m.lay;
    std::vector<double> a(lay.nx);
    for (int i = 0; i < lay.nx; ++i) {
        const double zxi = m.zxi_zface(i, lay.nz);
        a[static_cast<std::size_t>(i)] = std::sqrt(1.0 + zxi * zxi);
    }
    return a;
}

namespace {

// one-sided second-order value of a cell column at the top face
inline double face_value_top(const Grid2D& p, int i, int nz) {
    return 1.5 * p(i, nz - 1) - 0.5 * p(i, nz - 2);
}

}  // namespace

Grid2D div_faces_with_wall_flux(const Metrics& m, const FaceField& v,
                                std::span<const double> top_flux_density,
                                std::span<const double> bottom_flux_density) {
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    const Grid2D fxi = mac::flux_xi(m, v);
    const Grid2D fz = mac::flux_zeta(m, v);
    Grid2D d(nx, nz);
    for (int i = 0; i < nx; ++i) {
        const int i1 = (i + 1) % nx;
        for (int j = 0; j < nz; ++j) {
            const double ftop = (j == nz - 1)
                                    ? lay.hx * top_flux_density[static_cast<std::size_t>(i)]
                                    : fz(i, j + 1);
            const double fbot =
                (j == 0) ? lay.hx * bottom_flux_density[static_cast<std::size_t>(i)]
                         : fz(i, j);
            d(i, j) = (fxi(i1, j) - fxi(i, j) + ftop - fbot) /
                      (m.jac_cell(i, j) * lay.hx * lay.hz);
        }
    }
    return d;
}

RobinResult solve(const Metrics& m, const RobinInput& in,
                  const stokes::SpectralPrecond& prec, double tol, int maxit) {
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    assert(lay.bc == mac::BcMode::SlabWalls);
    const std::vector<double> atop = top_area_element(m);

    // operator: interior mimetic div grad plus the p-dependent part of the
    // Robin flux; all scaled to physical divergence units
    auto apply = [&](const Grid2D& p) {
        const FaceField g = mac::grad_dual(m, p);
        Grid2D out = mac::div_flux(m, g);
        for (int i = 0; i < nx; ++i) {
            const double flux_top =
                -lay.hx * atop[static_cast<std::size_t>(i)] *
                in.robin_coeff[static_cast<std::size_t>(i)] * face_value_top(p, i, nz);
            out(i, nz - 1) += flux_top;
        }
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < nz; ++j)
                out(i, j) /= m.jac_cell(i, j) * lay.hx * lay.hz;
        return out;
    };

    // right side: interior rhs minus the data parts of the boundary fluxes
    Grid2D b = in.rhs;
    for (int i = 0; i < nx; ++i) {
        const double ftop = lay.hx * atop[static_cast<std::size_t>(i)] *
                            in.robin_data[static_cast<std::size_t>(i)];
        b(i, nz - 1) -= ftop / (m.jac_cell(i, nz - 1) * lay.hx * lay.hz);
        // the bottom flux enters the cell balance with a minus sign
        const double fbot = lay.hx * in.bottom_flux[static_cast<std::size_t>(i)];
        b(i, 0) += fbot / (m.jac_cell(i, 0) * lay.hx * lay.hz);
    }

    auto precond = [&](const Grid2D& r) {
        Grid2D z = prec.poisson(r);
        for (std::size_t k = 0; k < z.size(); ++k) z.data()[k] = -z.data()[k];
        return z;
    };

    // preconditioned BiCGStab
    RobinResult res;
    res.p = Grid2D(nx, nz, 0.0);
    Grid2D r = b;
    const double bnorm = std::sqrt(
        par::det_dot({b.data(), b.size()}, {b.data(), b.size()}));
    if (bnorm == 0.0) {
        res.rel = 0.0;
        return res;
    }
    Grid2D rhat = r;
    Grid2D v(nx, nz, 0.0), pdir(nx, nz, 0.0);
    double rho = 1, alpha = 1, omega = 1;
    auto dot = [](const Grid2D& a, const Grid2D& c) {
        return par::det_dot({a.data(), a.size()}, {c.data(), c.size()});
    };
    for (int it = 0; it < maxit; ++it) {
        const double rho_new = dot(rhat, r);
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t k = 0; k < pdir.size(); ++k)
            pdir.data()[k] = r.data()[k] + beta * (pdir.data()[k] - omega * v.data()[k]);
        const Grid2D phat = precond(pdir);
        v = apply(phat);
        alpha = rho / dot(rhat, v);
        Grid2D s = r;
        for (std::size_t k = 0; k < s.size(); ++k) s.data()[k] -= alpha * v.data()[k];
        const Grid2D shat = precond(s);
        const Grid2D t = apply(shat);
        const double tt = dot(t, t);
        omega = tt > 0 ? dot(t, s) / tt : 0.0;
        for (std::size_t k = 0; k < res.p.size(); ++k)
            res.p.data()[k] += alpha * phat.data()[k] + omega * shat.data()[k];
        for (std::size_t k = 0; k < r.size(); ++k)
            r.data()[k] = s.data()[k] - omega * t.data()[k];
        res.rel = std::sqrt(dot(r, r)) / bnorm;
        res.iters = it + 1;
        if (res.rel <= tol) return res;
        if (omega == 0.0 || rho == 0.0) break;
    }
    throw ConvergenceError("initial-pressure solve did not converge");
}

}  // namespace polyfsi::robin
