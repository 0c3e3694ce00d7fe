#include "polyfsi/stokes.hpp"

#include <cassert>
#include <cmath>
#include <complex>

#include "polyfsi/shell_fft.hpp"

namespace polyfsi::stokes {

using mac::BcMode;
using mac::FaceField;
using mac::Layout;
using mac::Metrics;
using mac::WallTraces;

namespace {

// Thomas solve with complex right-hand side; coefficients real.
void tridiag(const std::vector<double>& sub, std::vector<double> diag,
             const std::vector<double>& sup, std::vector<std::complex<double>>& rhs) {
    const int n = static_cast<int>(diag.size());
    for (int i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

// cyclic (periodic) tridiagonal via Sherman-Morrison
void cyclic_tridiag(double sub, double diag, double sup,
                    std::vector<std::complex<double>>& rhs) {
    const int n = static_cast<int>(rhs.size());
    const double gamma = -diag;
    std::vector<double> dl(n, sub), d(n, diag), du(n, sup);
    d[0] -= gamma;
    d[n - 1] -= sup * sub / gamma;
    std::vector<std::complex<double>> r = rhs;
    tridiag(dl, d, du, r);
    std::vector<std::complex<double>> ucx(n, 0.0);
    ucx[0] = gamma;
    ucx[n - 1] = sub;
    tridiag(dl, d, du, ucx);
    const std::complex<double> num = r[0] + r[n - 1] * sup / gamma;
    const std::complex<double> den = 1.0 + ucx[0] + ucx[n - 1] * sup / gamma;
    for (int i = 0; i < n; ++i) rhs[i] = r[i] - num / den * ucx[i];
}

// FFT along xi of a (nx, rows) grid: per row transform over the first index.
void fft_columns(const Grid2D& g, std::vector<std::vector<std::complex<double>>>& out) {
    const int nx = g.nx(), rows = g.ny();
    out.assign(rows, {});
    std::vector<double> line(nx);
    for (int j = 0; j < rows; ++j) {
        for (int i = 0; i < nx; ++i) line[i] = g(i, j);
        sfft::forward_1d(line, out[j]);
    }
}

void ifft_columns(const std::vector<std::vector<std::complex<double>>>& in, Grid2D& g) {
    const int nx = g.nx(), rows = g.ny();
    std::vector<double> line(nx);
    for (int j = 0; j < rows; ++j) {
        sfft::backward_1d(in[j], line);
        for (int i = 0; i < nx; ++i) g(i, j) = line[i];
    }
}

}  // namespace

SpectralPrecond::SpectralPrecond(const Layout& lay) : lay_(lay) {}

Grid2D SpectralPrecond::poisson(const Grid2D& r) const {
    const int nx = lay_.nx, nz = lay_.nz;
    const double ax = lay_.hz / lay_.hx;  // xi-coupling weight
    const double az = lay_.hx / lay_.hz;

    std::vector<std::vector<std::complex<double>>> hat;
    fft_columns(r, hat);
    const int nb = nx / 2 + 1;

    // reorganize per mode: rows of hat are zeta levels
    std::vector<std::complex<double>> col(nz);
    Grid2D out(nx, nz);
    std::vector<std::vector<std::complex<double>>> res(nz,
                                                       std::vector<std::complex<double>>(nb));
    for (int k = 0; k < nb; ++k) {
        const double lam = ax * (2.0 * std::cos(2.0 * M_PI * k / nx) - 2.0);
        for (int j = 0; j < nz; ++j) col[j] = hat[j][k];
        if (lay_.bc == BcMode::Periodic) {
            if (k == 0) {
                // fully Fourier in zeta for the singular mode: pin the mean
                std::vector<std::complex<double>> czeta;
                std::vector<double> re(nz);
                for (int j = 0; j < nz; ++j) re[j] = col[j].real();
                sfft::forward_1d(re, czeta);
                for (int j = 0; j < nz / 2 + 1; ++j) {
                    const double lz = az * (2.0 * std::cos(2.0 * M_PI * j / nz) - 2.0);
                    czeta[j] = (j == 0) ? 0.0 : czeta[j] / lz;
                }
                std::vector<double> back(nz);
                sfft::backward_1d(czeta, back);
                for (int j = 0; j < nz; ++j) col[j] = back[j];
            } else {
                cyclic_tridiag(az, lam - 2.0 * az, az, col);
            }
        } else {
            std::vector<double> dl(nz, az), d(nz), du(nz, az);
            // the k = 0 block is singular (constants); a small symmetric
            // shift keeps the preconditioner SPD without touching the
            // mean-free response noticeably
            const double shift = (k == 0) ? 1e-6 * az : 0.0;
            for (int j = 0; j < nz; ++j) {
                const double ends = (j == 0 || j == nz - 1) ? 1.0 : 2.0;
                d[j] = lam - ends * az - shift;
            }
            tridiag(dl, d, du, col);
        }
        for (int j = 0; j < nz; ++j) res[j][k] = col[j];
    }
    ifft_columns(res, out);
    return out;
}

FaceField SpectralPrecond::helmholtz(const FaceField& r, double inv_dt) const {
    const int nx = lay_.nx, nz = lay_.nz;
    const double cell = lay_.hx * lay_.hz;
    FaceField out = FaceField::zeros(lay_);

    auto solve_component = [&](const Grid2D& rhs, Grid2D& x, double cx, double cz,
                               bool is_u2) {
        const int rows = rhs.ny();
        const int ndof_lo = (is_u2 && lay_.bc == BcMode::SlabWalls) ? 1 : 0;
        const int ndof_hi = (is_u2 && lay_.bc == BcMode::SlabWalls) ? rows - 1 : rows;
        const int n = ndof_hi - ndof_lo;
        if (n <= 0) return;

        std::vector<std::vector<std::complex<double>>> hat;
        fft_columns(rhs, hat);
        const int nb = nx / 2 + 1;
        std::vector<std::vector<std::complex<double>>> res(
            rows, std::vector<std::complex<double>>(nb, 0.0));
        std::vector<std::complex<double>> col(n);
        for (int k = 0; k < nb; ++k) {
            const double kx = cx * (2.0 - 2.0 * std::cos(2.0 * M_PI * k / nx)) /
                              (lay_.hx * lay_.hx);
            for (int j = 0; j < n; ++j) col[j] = hat[ndof_lo + j][k];
            const double offz = -0.5 * cz * cell / (lay_.hz * lay_.hz);
            const double base = inv_dt * cell + 0.5 * kx * cell;
            if (lay_.bc == BcMode::Periodic) {
                cyclic_tridiag(offz, base - 2.0 * offz, offz, col);
            } else {
                std::vector<double> dl(n, offz), d(n), du(n, offz);
                for (int j = 0; j < n; ++j) {
                    double diagz = -2.0 * offz;
                    if (!is_u2) {
                        // tangential ghosts reflect odd through the walls
                        if (j == 0 || j == n - 1) diagz = -3.0 * offz;
                    }
                    d[j] = base + diagz;
                }
                tridiag(dl, d, du, col);
            }
            for (int j = 0; j < n; ++j) res[ndof_lo + j][k] = col[j];
        }
        ifft_columns(res, x);
    };

    Grid2D x1(nx, nz), x2(nx, r.u2.ny());
    solve_component(r.u1, x1, 2.0, 1.0, false);
    solve_component(r.u2, x2, 1.0, 2.0, true);
    out.u1 = std::move(x1);
    out.u2 = std::move(x2);
    if (lay_.bc == BcMode::SlabWalls)
        for (int i = 0; i < nx; ++i) out.u2(i, 0) = out.u2(i, nz) = 0.0;
    return out;
}

FaceField weighted_grad(const Metrics& m, const Grid2D& p) {
    FaceField g = mac::grad_dual(m, p);
    const FaceField vol = mac::face_volumes(m);
    for (std::size_t k = 0; k < g.u1.size(); ++k) g.u1.data()[k] *= vol.u1.data()[k];
    for (std::size_t k = 0; k < g.u2.size(); ++k) g.u2.data()[k] *= vol.u2.data()[k];
    return g;
}

namespace {

double dot_cells(const Grid2D& a, const Grid2D& b) {
    return par::det_dot({a.data(), a.size()}, {b.data(), b.size()});
}

double dot_faces(const FaceField& a, const FaceField& b) {
    return par::det_dot({a.u1.data(), a.u1.size()}, {b.u1.data(), b.u1.size()}) +
           par::det_dot({a.u2.data(), a.u2.size()}, {b.u2.data(), b.u2.size()});
}

void remove_mean(Grid2D& g) {
    const double mean = par::det_sum({g.data(), g.size()}) / static_cast<double>(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) g.data()[k] -= mean;
}

}  // namespace

Pcg pcg_cells(const std::function<Grid2D(const Grid2D&)>& apply,
              const std::function<Grid2D(const Grid2D&)>& precond, const Grid2D& b,
              Grid2D& x, double tol, int maxit) {
    Pcg out;
    Grid2D r = b;
    remove_mean(r);
    const double bnorm = std::sqrt(dot_cells(r, r));
    if (bnorm == 0.0) {
        x.fill(0.0);
        out.ok = true;
        out.rel = 0.0;
        return out;
    }
    x.fill(0.0);
    Grid2D z = precond(r);
    remove_mean(z);
    Grid2D p = z;
    double rz = dot_cells(r, z);
    for (int it = 0; it < maxit; ++it) {
        Grid2D ap = apply(p);
        const double alpha = rz / dot_cells(p, ap);
        for (std::size_t k = 0; k < x.size(); ++k) {
            x.data()[k] += alpha * p.data()[k];
            r.data()[k] -= alpha * ap.data()[k];
        }
        const double rn = std::sqrt(dot_cells(r, r));
        out.iters = it + 1;
        out.rel = rn / bnorm;
        if (out.rel <= tol) {
            out.ok = true;
            break;
        }
        z = precond(r);
        remove_mean(z);
        const double rz_new = dot_cells(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < p.size(); ++k)
            p.data()[k] = z.data()[k] + beta * p.data()[k];
    }
    remove_mean(x);
    return out;
}

Pcg pcg_faces(const std::function<FaceField(const FaceField&)>& apply,
              const std::function<FaceField(const FaceField&)>& precond,
              const FaceField& b, FaceField& x, double tol, int maxit) {
    Pcg out;
    const double bnorm = std::sqrt(dot_faces(b, b));
    if (bnorm == 0.0) {
        x.fill(0.0);
        out.ok = true;
        out.rel = 0.0;
        return out;
    }
    // warm start from the incoming x
    FaceField r = b;
    {
        const FaceField ax = apply(x);
        r.axpy(-1.0, ax);
    }
    FaceField z = precond(r);
    FaceField p = z;
    double rz = dot_faces(r, z);
    for (int it = 0; it < maxit; ++it) {
        FaceField ap = apply(p);
        const double alpha = rz / dot_faces(p, ap);
        x.axpy(alpha, p);
        r.axpy(-alpha, ap);
        const double rn = std::sqrt(dot_faces(r, r));
        out.iters = it + 1;
        out.rel = rn / bnorm;
        if (out.rel <= tol) {
            out.ok = true;
            break;
        }
        z = precond(r);
        const double rz_new = dot_faces(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        p.scale(beta);
        p.axpy(1.0, z);
    }
    return out;
}

ProjectionResult project(const Metrics& m_new, FaceField& u, double dt,
                         const SpectralPrecond& prec, double tol, int maxit) {
    ProjectionResult res;
    const Layout& lay = m_new.lay;
    // solve (-D G) q = -D(u)/dt, SPD up to constants, then u -= dt G q
    Grid2D b = mac::div_flux(m_new, u);
    for (int i = 0; i < lay.nx; ++i)
        for (int j = 0; j < lay.nz; ++j) b(i, j) = -b(i, j) / dt;

    auto apply = [&](const Grid2D& q) {
        const FaceField g = mac::grad_dual(m_new, q);
        Grid2D dg = mac::div_flux(m_new, g);
        for (std::size_t k = 0; k < dg.size(); ++k) dg.data()[k] = -dg.data()[k];
        return dg;
    };
    auto precond = [&](const Grid2D& r) {
        Grid2D z = prec.poisson(r);
        for (std::size_t k = 0; k < z.size(); ++k) z.data()[k] = -z.data()[k];
        return z;
    };
    res.q = Grid2D(lay.nx, lay.nz, 0.0);
    res.stats = pcg_cells(apply, precond, b, res.q, tol, maxit);
    if (!res.stats.ok)
        throw ConvergenceError("pressure projection did not converge");
    const FaceField g = mac::grad_dual(m_new, res.q);
    u.axpy(-dt, g);
    res.div_after = mac::max_divergence(m_new, u);
    return res;
}

HomStepResult stokes_step_homogeneous(const Metrics& m_old, const Metrics& m_mid,
                                      const Metrics& m_new, const FaceField& w_old,
                                      const FaceField& extra_weighted,
                                      const Grid2D& p_lag, double dt,
                                      const SpectralPrecond& prec,
                                      const StepOptions& opt) {
    const Layout& lay = m_mid.lay;
    const WallTraces tr0 = WallTraces::zeros(lay.nx);
    const FaceField vol_old = mac::face_volumes(m_old);
    const FaceField vol_new = mac::face_volumes(m_new);

    // rhs = M_old w_old / dt - (1/2) A w_old - M G p_lag + extra
    FaceField rhs = extra_weighted;
    const FaceField aw = mac::apply_viscous(m_mid, w_old, tr0);
    const FaceField gp = weighted_grad(m_mid, p_lag);
    for (int i = 0; i < lay.nx; ++i) {
        for (int j = 0; j < lay.nz; ++j) {
            rhs.u1(i, j) += vol_old.u1(i, j) * w_old.u1(i, j) / dt - 0.5 * aw.u1(i, j) -
                            gp.u1(i, j);
        }
        const int lo = lay.bc == BcMode::SlabWalls ? 1 : 0;
        const int hi = lay.bc == BcMode::SlabWalls ? lay.nz : lay.nz;
        for (int j = lo; j < hi; ++j)
            rhs.u2(i, j) += vol_old.u2(i, j) * w_old.u2(i, j) / dt - 0.5 * aw.u2(i, j) -
                            gp.u2(i, j);
        if (lay.bc == BcMode::SlabWalls) {
            rhs.u2(i, 0) = 0.0;
            rhs.u2(i, lay.nz) = 0.0;
        }
    }

    auto apply = [&](const FaceField& w) {
        FaceField aww = mac::apply_viscous(m_mid, w, tr0);
        FaceField out = FaceField::zeros(lay);
        for (int i = 0; i < lay.nx; ++i) {
            for (int j = 0; j < lay.nz; ++j)
                out.u1(i, j) = vol_new.u1(i, j) * w.u1(i, j) / dt + 0.5 * aww.u1(i, j);
            const int lo = lay.bc == BcMode::SlabWalls ? 1 : 0;
            const int hi = lay.nz;
            for (int j = lo; j < hi; ++j)
                out.u2(i, j) = vol_new.u2(i, j) * w.u2(i, j) / dt + 0.5 * aww.u2(i, j);
        }
        return out;
    };
    auto precond = [&](const FaceField& r) { return prec.helmholtz(r, 1.0 / dt); };

    HomStepResult res;
    res.w = w_old;  // warm start
    res.visc = pcg_faces(apply, precond, rhs, res.w, opt.tol_visc, opt.maxit);
    if (!res.visc.ok) throw ConvergenceError("viscous solve did not converge");

    auto projres = project(m_new, res.w, dt, prec, opt.tol_proj, opt.maxit);
    res.q = std::move(projres.q);
    res.proj = projres.stats;
    res.div_after = projres.div_after;
    return res;
}

}  // namespace polyfsi::stokes
