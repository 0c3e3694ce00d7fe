#include "polyfsi/solvent_structure.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

#include "polyfsi/shell_fft.hpp"

namespace polyfsi::ss {

using ext::SlabExtension;
using mac::BcMode;
using mac::FaceField;
using mac::Layout;
using mac::Metrics;
using mac::WallTraces;

namespace {

std::vector<double> resample(std::span<const double> f, int m) {
    return sfft::resample_1d(f, m);
}

void axpy_all(FaceField& y, double a, const FaceField& x) { y.axpy(a, x); }

// full -D^T p including the wall-row entries (boundary pressure pairing)
FaceField weighted_grad_full(const Metrics& m, const Grid2D& p) {
    FaceField g = stokes::weighted_grad(m, p);  // wall rows zero
    const Layout& lay = m.lay;
    for (int i = 0; i < lay.nx; ++i) {
        g.u2(i, 0) = lay.hx * p(i, 0);            // -(hx (0 - p_below-less cell))
        g.u2(i, lay.nz) = -lay.hx * p(i, lay.nz - 1);
    }
    return g;
}

double dot_all(const FaceField& a, const FaceField& b) {
    return par::det_dot({a.u1.data(), a.u1.size()}, {b.u1.data(), b.u1.size()}) +
           par::det_dot({a.u2.data(), a.u2.size()}, {b.u2.data(), b.u2.size()});
}

}  // namespace

Stepper::Stepper(const ReferenceGeometry& geom, int nx, int nz, Options opt)
    : geom_(&geom), lay_(Layout::make(nx, nz, BcMode::SlabWalls)), opt_(opt),
      prec_(lay_), shell_(geom.shell_n()), shell_n_(geom.shell_n()),
      ext_pc_(ext::extension_profile(geom)) {
    assert(geom.kind() == GeomKind::FlatSlab2D);
    // the lift lives in the inner tube when the grid resolves its collar;
    // otherwise widen it (any divergence-free lift serves the reduction)
    if (lay_.hz > -ext_pc_.flat_start() / 2.0) {
        const double width = std::min(geom.L(), 8.0 * lay_.hz);
        ext_pc_ = CutoffProfile(width, -1.0, 0.5);
    }
}

double Stepper::fluid_energy(const Metrics& m, const FaceField& u) {
    const FaceField vol = mac::face_volumes(m);
    return 0.5 * mac::inner(vol, u, u);
}

Stepper::State Stepper::make_state(std::span<const double> eta0,
                                   std::span<const double> eta_star,
                                   const std::function<Vec(const Vec&)>& u0,
                                   const Grid2D* p0) const {
    State s;
    s.eta.assign(eta0.begin(), eta0.end());
    s.eta_t.assign(eta_star.begin(), eta_star.end());
    const std::vector<double> eta_f = resample(eta0, lay_.nx);
    s.metrics = Metrics::from_displacement(lay_, eta_f, geom_->cutoff());
    s.phi = ext::build_extension(s.metrics, resample(eta_star, lay_.nx), ext_pc_);

    FaceField samples = FaceField::zeros(lay_);
    if (u0) {
        for (int i = 0; i < lay_.nx; ++i) {
            for (int j = 0; j < lay_.nz; ++j) {
                const double z = 0.5 * (s.metrics.z_node(i, j) + s.metrics.z_node(i, j + 1));
                samples.u1(i, j) = u0(Vec(lay_.xi_node(i), z))[0];
            }
            for (int j = 0; j <= lay_.nz; ++j) {
                const int i1 = (i + 1) % lay_.nx;
                const double z = 0.5 * (s.metrics.z_node(i, j) + s.metrics.z_node(i1, j));
                samples.u2(i, j) = u0(Vec(lay_.xi_center(i), z))[1];
            }
        }
    }
    s.w = samples;
    axpy_all(s.w, -1.0, s.phi.phi);
    for (int i = 0; i < lay_.nx; ++i) s.w.u2(i, 0) = s.w.u2(i, lay_.nz) = 0.0;
    stokes::project(s.metrics, s.w, 1.0, prec_, opt_.solver.tol_proj, opt_.solver.maxit);
    s.u = s.w;
    axpy_all(s.u, 1.0, s.phi.phi);
    s.p = p0 ? *p0 : Grid2D(lay_.nx, lay_.nz, 0.0);
    return s;
}

FaceField Stepper::assemble_external(double t_mid, const Metrics& m_mid,
                                     const DataFeeds& data, const StressPair& stress,
                                     FaceField* f_part_out) const {
    const FaceField vol = mac::face_volumes(m_mid);
    FaceField fx = FaceField::zeros(lay_);
    if (data.body_force) {
        const FaceField f = data.body_force(t_mid, m_mid);
        for (std::size_t k = 0; k < fx.u1.size(); ++k)
            fx.u1.data()[k] = vol.u1.data()[k] * f.u1.data()[k];
        for (std::size_t k = 0; k < fx.u2.size(); ++k)
            fx.u2.data()[k] = vol.u2.data()[k] * f.u2.data()[k];
    }
    if (f_part_out) *f_part_out = fx;

    if (stress.old_level && stress.new_level) {
        const auto& a = *stress.old_level;
        const auto& b = *stress.new_level;
        Grid2D t11(lay_.nx, lay_.nz), t12(lay_.nx, lay_.nz), t22(lay_.nx, lay_.nz);
        for (int i = 0; i < lay_.nx; ++i)
            for (int j = 0; j < lay_.nz; ++j) {
                t11(i, j) = 0.5 * (a.comp[0](i, j) + b.comp[0](i, j));
                t12(i, j) = 0.25 * (a.comp[1](i, j) + a.comp[2](i, j) +
                                    b.comp[1](i, j) + b.comp[2](i, j));
                t22(i, j) = 0.5 * (a.comp[3](i, j) + b.comp[3](i, j));
            }
        const FaceField divt = mac::div_cell_tensor(m_mid, t11, t12, t22);
        for (std::size_t k = 0; k < fx.u1.size(); ++k)
            fx.u1.data()[k] += vol.u1.data()[k] * divt.u1.data()[k];
        for (std::size_t k = 0; k < fx.u2.size(); ++k)
            fx.u2.data()[k] += vol.u2.data()[k] * divt.u2.data()[k];
    }
    return fx;
}

StepLedger Stepper::advance(State& s, double dt, const DataFeeds& data,
                            const StressPair& stress) const {
    const double t1 = s.t + dt, t_mid = s.t + 0.5 * dt;
    const WallTraces tr0 = WallTraces::zeros(lay_.nx);
    const int nx = lay_.nx, nz = lay_.nz;
    const double h_f = lay_.hx;
    const double h_s = 2.0 * M_PI / shell_n_;

    StepLedger led;
    led.t0 = s.t;
    led.t1 = t1;
    const double e_kin0 =
        0.5 * std::pow(sfft::l2_norm_1d(s.eta_t), 2);
    const double e_el0 = 0.5 * std::pow(sfft::seminorm_1d(s.eta, 2), 2);
    const double e_f0 = fluid_energy(s.metrics, s.u);

    const std::vector<double> g_mid =
        data.shell_force ? data.shell_force(t_mid) : std::vector<double>(shell_n_, 0.0);
    const std::vector<double> eta_f_old = resample(s.eta, nx);
    const std::vector<double> etat_f_old = resample(s.eta_t, nx);

    const bool picard_conv = s.conv_hist.size() < 2;
    FaceField conv_ab2 = FaceField::zeros(lay_);
    if (!picard_conv) {
        conv_ab2 = s.conv_hist.back();
        conv_ab2.scale(1.5);
        conv_ab2.axpy(-0.5, s.conv_hist.front());
    }

    std::vector<double> etat_k = s.eta_t;  // current interface velocity iterate
    std::vector<double> eta_new(shell_n_), etat_shell(shell_n_);
    double lambda = 0;
    bool converged = false;
    double omega = opt_.relax;
    std::vector<double> r_prev;

    Metrics m_new, m_mid;
    SlabExtension phi_new;
    FaceField w_new = FaceField::zeros(lay_), u_new = FaceField::zeros(lay_);
    FaceField conv_used = FaceField::zeros(lay_);
    FaceField fx_total = FaceField::zeros(lay_), fx_f = FaceField::zeros(lay_);
    Grid2D p_new(nx, nz, 0.0);
    stokes::HomStepResult fluid_res;

    for (int k = 0; k < opt_.max_subiter; ++k) {
        led.subiters = k + 1;
        // geometry at the new level from the current interface velocity
        for (int i = 0; i < shell_n_; ++i)
            eta_new[static_cast<std::size_t>(i)] =
                s.eta[static_cast<std::size_t>(i)] +
                0.5 * dt * (s.eta_t[static_cast<std::size_t>(i)] +
                            etat_k[static_cast<std::size_t>(i)]);
        {
            double maxdisp = 0;
            for (double v : eta_new) maxdisp = std::max(maxdisp, std::abs(v));
            if (maxdisp > geom_->ell()) {
                std::ostringstream os;
                os << "displacement " << maxdisp << " reached the bound "
                   << geom_->ell() << " at t=" << t1;
                throw DegeneracyError(os.str());
            }
        }
        const std::vector<double> eta_f_new = resample(eta_new, nx);
        std::vector<double> eta_f_mid(nx);
        for (int i = 0; i < nx; ++i)
            eta_f_mid[static_cast<std::size_t>(i)] =
                0.5 * (eta_f_old[static_cast<std::size_t>(i)] +
                       eta_f_new[static_cast<std::size_t>(i)]);
        m_new = Metrics::from_displacement(lay_, eta_f_new, geom_->cutoff());
        m_mid = Metrics::from_displacement(lay_, eta_f_mid, geom_->cutoff());

        // extension at the new level
        phi_new = ext::build_extension(m_new, resample(etat_k, nx), ext_pc_);
        FaceField phi_mid = s.phi.phi;
        phi_mid.axpy(1.0, phi_new.phi);
        phi_mid.scale(0.5);

        // convection: two-level extrapolation, or midpoint Picard on the
        // first step
        if (picard_conv) {
            FaceField u_mid_prev = s.u;
            u_mid_prev.axpy(1.0, (k == 0) ? s.u : u_new);
            u_mid_prev.scale(0.5);
            Grid2D fxi = mac::flux_xi(m_mid, u_mid_prev);
            Grid2D fz = mac::flux_zeta(m_mid, u_mid_prev);
            for (int i = 0; i < nx; ++i) {
                const int i1 = (i + 1) % nx;
                for (int j = 0; j <= nz; ++j) {
                    const double zdot =
                        0.5 *
                        ((m_new.z_node(i, j) - s.metrics.z_node(i, j)) +
                         (m_new.z_node(i1, j) - s.metrics.z_node(i1, j))) /
                        dt;
                    fz(i, j) -= lay_.hx * zdot;
                }
            }
            conv_used = mac::convect_weighted(m_mid, fxi, fz, u_mid_prev, tr0);
        } else {
            conv_used = conv_ab2;
        }

        // explicit weighted right side
        fx_total = assemble_external(t_mid, m_mid, data, stress, &fx_f);
        FaceField rhs_extra = fx_total;
        rhs_extra.axpy(-1.0, conv_used);
        const FaceField a_phi = mac::apply_viscous(m_mid, phi_mid, tr0);
        rhs_extra.axpy(-1.0, a_phi);
        const FaceField vol_new = mac::face_volumes(m_new);
        const FaceField vol_old = mac::face_volumes(s.metrics);
        for (std::size_t q = 0; q < rhs_extra.u1.size(); ++q)
            rhs_extra.u1.data()[q] -= (vol_new.u1.data()[q] * phi_new.phi.u1.data()[q] -
                                       vol_old.u1.data()[q] * s.phi.phi.u1.data()[q]) /
                                      dt;
        for (std::size_t q = 0; q < rhs_extra.u2.size(); ++q)
            rhs_extra.u2.data()[q] -= (vol_new.u2.data()[q] * phi_new.phi.u2.data()[q] -
                                       vol_old.u2.data()[q] * s.phi.phi.u2.data()[q]) /
                                      dt;

        fluid_res = stokes::stokes_step_homogeneous(s.metrics, m_mid, m_new, s.w,
                                                    rhs_extra, s.p, dt, prec_,
                                                    opt_.solver);
        w_new = fluid_res.w;
        u_new = w_new;
        axpy_all(u_new, 1.0, phi_new.phi);
        p_new = s.p;
        for (std::size_t q = 0; q < p_new.size(); ++q)
            p_new.data()[q] += fluid_res.q.data()[q];

        // interface load
        std::vector<double> load_shell;
        if (opt_.variational_load) {
            FaceField res_field = FaceField::zeros(lay_);
            for (std::size_t q = 0; q < res_field.u1.size(); ++q)
                res_field.u1.data()[q] =
                    (vol_new.u1.data()[q] * u_new.u1.data()[q] -
                     vol_old.u1.data()[q] * s.u.u1.data()[q]) /
                    dt;
            for (std::size_t q = 0; q < res_field.u2.size(); ++q)
                res_field.u2.data()[q] =
                    (vol_new.u2.data()[q] * u_new.u2.data()[q] -
                     vol_old.u2.data()[q] * s.u.u2.data()[q]) /
                    dt;
            FaceField u_mid = s.u;
            u_mid.axpy(1.0, u_new);
            u_mid.scale(0.5);
            res_field.axpy(1.0, mac::apply_viscous(m_mid, u_mid, tr0));
            res_field.axpy(1.0, conv_used);
            res_field.axpy(1.0, weighted_grad_full(m_mid, p_new));
            res_field.axpy(-1.0, fx_total);
            {
                // on interior unknowns the balance holds up to the splitting
                // leftovers; record the worst entry as a sanity diagnostic
                double md = 0;
                for (int i = 0; i < nx; ++i) {
                    for (int j = 0; j < nz; ++j)
                        md = std::max(md, std::abs(res_field.u1(i, j)));
                    for (int j = 1; j < nz; ++j)
                        md = std::max(md, std::abs(res_field.u2(i, j)));
                }
                led.momentum_defect = md;
            }

            const std::vector<double> gxi =
                ext::extension_transpose(m_mid, res_field, ext_pc_);
            std::vector<double> lf(nx);
            for (int i = 0; i < nx; ++i)
                lf[static_cast<std::size_t>(i)] = -gxi[static_cast<std::size_t>(i)] / h_f;
            load_shell = resample(lf, shell_n_);
        } else {
            FaceField u_mid = s.u;
            u_mid.axpy(1.0, u_new);
            u_mid.scale(0.5);
            Grid2D t11(nx, nz, 0.0), t12(nx, nz, 0.0), t22(nx, nz, 0.0);
            const bool have_t = stress.old_level && stress.new_level;
            if (have_t)
                for (int i = 0; i < nx; ++i)
                    for (int j = 0; j < nz; ++j) {
                        t11(i, j) = 0.5 * (stress.old_level->comp[0](i, j) +
                                           stress.new_level->comp[0](i, j));
                        t12(i, j) = 0.25 * (stress.old_level->comp[1](i, j) +
                                            stress.old_level->comp[2](i, j) +
                                            stress.new_level->comp[1](i, j) +
                                            stress.new_level->comp[2](i, j));
                        t22(i, j) = 0.5 * (stress.old_level->comp[3](i, j) +
                                           stress.new_level->comp[3](i, j));
                    }
            const std::vector<double> cols = assemble_shell_load(
                m_mid, u_mid, p_new, have_t ? &t11 : nullptr, have_t ? &t12 : nullptr,
                have_t ? &t22 : nullptr);
            load_shell = resample(cols, shell_n_);
        }

        // shell trapezoid with the mid-level right side
        std::vector<double> rhs_mid(static_cast<std::size_t>(shell_n_));
        for (int i = 0; i < shell_n_; ++i)
            rhs_mid[static_cast<std::size_t>(i)] =
                g_mid[static_cast<std::size_t>(i)] + load_shell[static_cast<std::size_t>(i)];
        auto shell_res = shell_.step(s.eta, s.eta_t, rhs_mid, dt, true);
        lambda = shell_res.lambda;
        etat_shell = shell_res.eta_t;

        std::vector<double> r(static_cast<std::size_t>(shell_n_));
        double resid = 0;
        for (int i = 0; i < shell_n_; ++i) {
            r[static_cast<std::size_t>(i)] = etat_shell[static_cast<std::size_t>(i)] -
                                             etat_k[static_cast<std::size_t>(i)];
            resid = std::max(resid, std::abs(r[static_cast<std::size_t>(i)]));
        }
        led.interface_resid = resid;
        if (resid <= opt_.tol_fsi) {
            converged = true;
            eta_new = shell_res.eta;
            double wl = 0;
            for (int i = 0; i < shell_n_; ++i)
                wl += load_shell[static_cast<std::size_t>(i)] * 0.5 *
                      (s.eta_t[static_cast<std::size_t>(i)] +
                       etat_shell[static_cast<std::size_t>(i)]);
            led.w_load = dt * wl * h_s;
            break;
        }
        if (opt_.aitken && !r_prev.empty()) {
            double num = 0, den = 0;
            for (int i = 0; i < shell_n_; ++i) {
                const double dr = r[static_cast<std::size_t>(i)] -
                                  r_prev[static_cast<std::size_t>(i)];
                num += r_prev[static_cast<std::size_t>(i)] * dr;
                den += dr * dr;
            }
            if (den > 0) omega = -omega * num / den;
            omega = std::clamp(omega, 0.05, 1.5);
        }
        r_prev = r;
        for (int i = 0; i < shell_n_; ++i)
            etat_k[static_cast<std::size_t>(i)] += omega * r[static_cast<std::size_t>(i)];
    }
    if (!converged)
        throw ConvergenceError(
            "interface sub-iterations did not reach tol_fsi (added-mass "
            "instability; reduce dt)");

    // ledger terms at the converged configuration
    FaceField u_mid = s.u;
    u_mid.axpy(1.0, u_new);
    u_mid.scale(0.5);
    std::vector<double> etat_mid(static_cast<std::size_t>(shell_n_));
    for (int i = 0; i < shell_n_; ++i)
        etat_mid[static_cast<std::size_t>(i)] =
            0.5 * (s.eta_t[static_cast<std::size_t>(i)] +
                   etat_shell[static_cast<std::size_t>(i)]);

    led.lambda = lambda;
    led.div_after = fluid_res.div_after;
    led.visc_iters = fluid_res.visc.iters;
    led.proj_iters = fluid_res.proj.iters;
    led.d_fluid = dt * mac::dissipation(m_mid, u_mid, tr0);
    led.d_shell = dt * std::pow(sfft::seminorm_1d(etat_mid, 1), 2);
    led.w_f = dt * dot_all(fx_f, u_mid);
    {
        FaceField fx_t = fx_total;
        fx_t.axpy(-1.0, fx_f);
        led.w_t = dt * dot_all(fx_t, u_mid);
    }
    {
        double wg = 0;
        for (int i = 0; i < shell_n_; ++i)
            wg += g_mid[static_cast<std::size_t>(i)] * etat_mid[static_cast<std::size_t>(i)];
        led.w_g = dt * wg * h_s;
    }

    const double e_kin1 = 0.5 * std::pow(sfft::l2_norm_1d(etat_shell), 2);
    const double e_el1 = 0.5 * std::pow(sfft::seminorm_1d(eta_new, 2), 2);
    const double e_f1 = fluid_energy(m_new, u_new);
    led.e_shell_kin = e_kin1;
    led.e_shell_el = e_el1;
    led.e_fluid = e_f1;
    led.residual = (e_kin1 + e_el1 + e_f1) - (e_kin0 + e_el0 + e_f0) + led.d_shell +
                   led.d_fluid - led.w_f - led.w_g - led.w_t;

    // store the convection term of this step for the next extrapolation
    {
        Grid2D fxi = mac::flux_xi(m_mid, u_mid);
        Grid2D fz = mac::flux_zeta(m_mid, u_mid);
        for (int i = 0; i < nx; ++i) {
            const int i1 = (i + 1) % nx;
            for (int j = 0; j <= nz; ++j) {
                const double zdot = 0.5 *
                                    ((m_new.z_node(i, j) - s.metrics.z_node(i, j)) +
                                     (m_new.z_node(i1, j) - s.metrics.z_node(i1, j))) /
                                    dt;
                fz(i, j) -= lay_.hx * zdot;
            }
        }
        FaceField c_next = mac::convect_weighted(m_mid, fxi, fz, u_mid, tr0);
        if (s.conv_hist.size() == 2) s.conv_hist.erase(s.conv_hist.begin());
        s.conv_hist.push_back(std::move(c_next));
    }

    // commit
    s.t = t1;
    s.eta = eta_new;
    s.eta_t = etat_shell;
    s.w = std::move(w_new);
    s.u = std::move(u_new);
    s.p = std::move(p_new);
    s.metrics = std::move(m_new);
    s.phi = std::move(phi_new);
    led.kin_trace_err = kinematic_trace_error(s);
    return led;
}

double Stepper::kinematic_trace_error(const State& s) const {
    const std::vector<double> xi_f = resample(s.eta_t, lay_.nx);
    double k = 0;
    for (double v : xi_f) k += v;
    k /= lay_.nx;
    double err = 0;
    for (int i = 0; i < lay_.nx; ++i) {
        const double want =
            0.5 * (xi_f[static_cast<std::size_t>(i)] +
                   xi_f[static_cast<std::size_t>((i + 1) % lay_.nx)]) -
            k;
        err = std::max(err, std::abs(s.u.u2(i, lay_.nz) - want));
    }
    return err;
}

// ---------------------------------------------------------------------------
// pointwise boundary traction
// ---------------------------------------------------------------------------

std::vector<double> assemble_shell_load(const Metrics& m, const FaceField& u,
                                        const Grid2D& p, const Grid2D* t11,
                                        const Grid2D* t12, const Grid2D* t22) {
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    std::vector<double> load(static_cast<std::size_t>(nx));
    (void)t11;

    auto extrap_cell = [&](const Grid2D& c, int i) {
        return 1.5 * c(i, nz - 1) - 0.5 * c(i, nz - 2);
    };

    for (int i = 0; i < nx; ++i) {
        const int i1 = (i + 1) % nx;
        const double zxi = m.zxi_zface(i, nz);
        // one-sided dZ/dzeta at the top face from averaged node heights
        auto zbar = [&](int j) { return 0.5 * (m.z_node(i, j) + m.z_node(i1, j)); };
        const double zz =
            (3.0 * zbar(nz) - 4.0 * zbar(nz - 1) + zbar(nz - 2)) / (2.0 * lay.hz);

        const double dzu2 =
            (3.0 * u.u2(i, nz) - 4.0 * u.u2(i, nz - 1) + u.u2(i, nz - 2)) /
            (2.0 * lay.hz);
        const double du2_dx2 = dzu2 / zz;
        const int im = (i + nx - 1) % nx;
        const double du2_dxi = (u.u2(i1, nz) - u.u2(im, nz)) / (2.0 * lay.hx);
        const double du2_dx1 = du2_dxi - zxi / zz * dzu2;

        // wall derivative of the tangential velocity (zero trace), one-sided
        // quadratic fit through the trace and the two face rows below
        auto dz_u1_col = [&](int col) {
            return (8.0 * 0.0 - 9.0 * u.u1(col, nz - 1) + u.u1(col, nz - 2)) /
                   (3.0 * lay.hz);
        };
        const double du1_dx2 = 0.5 * (dz_u1_col(i) + dz_u1_col(i1)) / zz;

        const double p_top = extrap_cell(p, i);
        const double t12_top = t12 ? extrap_cell(*t12, i) : 0.0;
        const double t22_top = t22 ? extrap_cell(*t22, i) : 0.0;

        const double s21 = du1_dx2 + du2_dx1 + t12_top;
        const double s22 = 2.0 * du2_dx2 - p_top + t22_top;
        load[static_cast<std::size_t>(i)] = -(-zxi * s21 + s22);
    }
    return load;
}

}  // namespace polyfsi::ss
