#include "polyfsi/coupling.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

#include "polyfsi/interp.hpp"
#include "polyfsi/shell_fft.hpp"

namespace polyfsi::coupling {

using mac::FaceField;
using mac::Layout;
using mac::Metrics;
using oldroyd::BigVec;
using solute::StressField;

// ---------------------------------------------------------------------------
// GridHistory
// ---------------------------------------------------------------------------

GridHistory::GridHistory(const Layout& lay, const CutoffProfile& pc)
    : lay_(lay), pc_(pc) {}

void GridHistory::add_stamp(double t, const FaceField& u,
                            const std::vector<double>& eta_f) {
    assert(times_.empty() || t > times_.back());
    for (double e : eta_f)
        if (!(std::abs(e) < pc_.L()))
            throw DegeneracyError("history stamp outside the admissible tube");
    const int nx = lay_.nx, nz = lay_.nz;
    Stamp s;
    s.eta_f = eta_f;
    const Metrics m = Metrics::from_displacement(lay_, eta_f, pc_);

    // padded u1: rows -2..nz+1 (odd reflection through both zero-trace walls)
    s.u1pad = Grid2D(nx, nz + 4);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nz; ++j) s.u1pad(i, j + 2) = u.u1(i, j);
        s.u1pad(i, 1) = -u.u1(i, 0);
        s.u1pad(i, 0) = -u.u1(i, 1);
        s.u1pad(i, nz + 2) = -u.u1(i, nz - 1);
        s.u1pad(i, nz + 3) = -u.u1(i, nz - 2);
    }
    // padded u2: rows -2..nz+2 (linear extrapolation past the walls)
    s.u2pad = Grid2D(nx, nz + 5);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j <= nz; ++j) s.u2pad(i, j + 2) = u.u2(i, j);
        s.u2pad(i, 1) = 2.0 * u.u2(i, 0) - u.u2(i, 1);
        s.u2pad(i, 0) = 2.0 * u.u2(i, 0) - u.u2(i, 2);
        s.u2pad(i, nz + 3) = 2.0 * u.u2(i, nz) - u.u2(i, nz - 1);
        s.u2pad(i, nz + 4) = 2.0 * u.u2(i, nz) - u.u2(i, nz - 2);
    }
    // padded center gradients
    const auto g = mac::velocity_gradient(m, u, mac::WallTraces::zeros(nx));
    auto pad_cells = [&](const Grid2D& c) {
        Grid2D out(nx, nz + 4);
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < nz; ++j) out(i, j + 2) = c(i, j);
            out(i, 1) = 2.0 * c(i, 0) - c(i, 1);
            out(i, 0) = 2.0 * c(i, 0) - c(i, 2);
            out(i, nz + 2) = 2.0 * c(i, nz - 1) - c(i, nz - 2);
            out(i, nz + 3) = 2.0 * c(i, nz - 1) - c(i, nz - 3);
        }
        return out;
    };
    s.g11 = pad_cells(g.g11);
    s.g12 = pad_cells(g.g12);
    s.g21 = pad_cells(g.g21);
    s.g22 = pad_cells(g.g22);

    times_.push_back(t);
    stamps_.push_back(std::move(s));
}

std::pair<int, double> GridHistory::bracket(double t) const {
    const int n = static_cast<int>(times_.size());
    assert(n >= 1);
    if (n == 1) return {0, 0.0};
    int m = static_cast<int>(std::upper_bound(times_.begin(), times_.end(), t) -
                             times_.begin()) -
            1;
    m = std::clamp(m, 0, n - 2);
    const double theta = (t - times_[m]) / (times_[m + 1] - times_[m]);
    return {m, std::clamp(theta, 0.0, 1.0)};
}

namespace {

// periodic cubic in xi at sample abscissae origin + k h, padded rows in the
// second index
double bicubic_padded(const Grid2D& pad, double hx, double x_origin, double hz,
                      double z_origin_padded, double xi, double zeta) {
    const int nx = pad.nx();
    const double u = (xi - x_origin) / hx;
    const double v = (zeta - z_origin_padded) / hz;
    const double fu = std::floor(u), fv = std::floor(v);
    const int i0 = static_cast<int>(fu);
    int j0 = static_cast<int>(fv);
    j0 = std::clamp(j0, 1, pad.ny() - 3);
    double wu[4], wv[4];
    interp::cr_weights(u - fu, wu);
    interp::cr_weights(std::clamp(v - static_cast<double>(j0), 0.0, 1.0), wv);
    double acc = 0;
    for (int a = 0; a < 4; ++a) {
        const int i = interp::wrap(i0 - 1 + a, nx);
        double row = 0;
        for (int b = 0; b < 4; ++b) row += wv[b] * pad(i, j0 - 1 + b);
        acc += wu[a] * row;
    }
    return acc;
}

}  // namespace

double GridHistory::pullback_zeta(const Stamp& s, double y, double s_hat) const {
    const double e = interp::periodic_cubic(
        {s.eta_f.data(), s.eta_f.size()}, 0.0, lay_.hx, y);
    return 1.0 + invert_normal_offset(pc_, e, s_hat);
}

double GridHistory::sample_u1(const Stamp& s, double xi, double zeta) const {
    // rows at zeta = (j + 1/2) hz, padded start at j = -2
    return bicubic_padded(s.u1pad, lay_.hx, 0.0, lay_.hz, (-2 + 0.5) * lay_.hz, xi,
                          zeta);
}

double GridHistory::sample_u2(const Stamp& s, double xi, double zeta) const {
    // rows at zeta = j hz, padded start at j = -2; centers in xi
    return bicubic_padded(s.u2pad, lay_.hx, 0.5 * lay_.hx, lay_.hz, -2.0 * lay_.hz,
                          xi, zeta);
}

double GridHistory::sample_cells(const Grid2D& g, double xi, double zeta) const {
    return bicubic_padded(g, lay_.hx, 0.5 * lay_.hx, lay_.hz, (-2 + 0.5) * lay_.hz,
                          xi, zeta);
}

Vec GridHistory::velocity(double t, const Vec& x) const {
    const auto [m, theta] = bracket(t);
    const double s_hat = x[1] - 1.0;
    Vec out(0.0, 0.0);
    for (int pass = 0; pass < 2; ++pass) {
        const double w = pass == 0 ? 1.0 - theta : theta;
        if (w == 0.0) continue;
        const Stamp& st = stamps_[static_cast<std::size_t>(m + pass)];
        const double zeta = pullback_zeta(st, x[0], s_hat);
        out[0] += w * sample_u1(st, x[0], zeta);
        out[1] += w * sample_u2(st, x[0], zeta);
    }
    return out;
}

oldroyd::Mat GridHistory::gradient(double t, const Vec& x) const {
    const auto [m, theta] = bracket(t);
    const double s_hat = x[1] - 1.0;
    oldroyd::Mat out = oldroyd::Mat::Zero(2, 2);
    for (int pass = 0; pass < 2; ++pass) {
        const double w = pass == 0 ? 1.0 - theta : theta;
        if (w == 0.0) continue;
        const Stamp& st = stamps_[static_cast<std::size_t>(m + pass)];
        const double zeta = pullback_zeta(st, x[0], s_hat);
        out(0, 0) += w * sample_cells(st.g11, x[0], zeta);
        out(0, 1) += w * sample_cells(st.g12, x[0], zeta);
        out(1, 0) += w * sample_cells(st.g21, x[0], zeta);
        out(1, 1) += w * sample_cells(st.g22, x[0], zeta);
    }
    return out;
}

double GridHistory::eta_at(double t, double y) const {
    const auto [m, theta] = bracket(t);
    const Stamp& a = stamps_[static_cast<std::size_t>(m)];
    const Stamp& b = stamps_[static_cast<std::size_t>(m + (stamps() > 1 ? 1 : 0))];
    const double ea =
        interp::periodic_cubic({a.eta_f.data(), a.eta_f.size()}, 0.0, lay_.hx, y);
    const double eb =
        interp::periodic_cubic({b.eta_f.data(), b.eta_f.size()}, 0.0, lay_.hx, y);
    return (1.0 - theta) * ea + theta * eb;
}

double GridHistory::boundary_excess(double t, const Vec& x) const {
    const double top = (x[1] - 1.0) - eta_at(t, x[0]);
    return std::max(top, -x[1]);
}

Vec GridHistory::project_inside(double t, const Vec& x) const {
    Vec out = x;
    const double zmax = 1.0 + eta_at(t, x[0]);
    out[1] = std::clamp(out[1], 0.0, zmax);
    return out;
}

// ---------------------------------------------------------------------------
// stress interpolation
// ---------------------------------------------------------------------------

BigVec interp_stress(const Metrics& m, const CutoffProfile& pc,
                     const std::vector<double>& eta_f, const StressField& t,
                     const Vec& xhat) {
    const Layout& lay = m.lay;
    const double e = interp::periodic_cubic({eta_f.data(), eta_f.size()}, 0.0,
                                            lay.hx, xhat[0]);
    const double zeta = 1.0 + invert_normal_offset(pc, e, xhat[1] - 1.0);
    BigVec out(static_cast<int>(t.comp.size()));
    for (std::size_t c = 0; c < t.comp.size(); ++c) {
        // clamped cubic on cell centers
        const Grid2D& g = t.comp[c];
        const double u = xhat[0] / lay.hx - 0.5;
        const double v = zeta / lay.hz - 0.5;
        const double fu = std::floor(u);
        const int i0 = static_cast<int>(fu);
        int j0 = static_cast<int>(std::floor(v));
        j0 = std::clamp(j0, 0, lay.nz - 2);
        double wu[4], wv[4];
        interp::cr_weights(u - fu, wu);
        interp::cr_weights(std::clamp(v - j0, 0.0, 1.0), wv);
        double acc = 0;
        for (int a = 0; a < 4; ++a) {
            const int i = interp::wrap(i0 - 1 + a, lay.nx);
            double row = 0;
            for (int b = 0; b < 4; ++b)
                row += wv[b] * g(i, interp::clamp(j0 - 1 + b, lay.nz));
            acc += wu[a] * row;
        }
        out(static_cast<int>(c)) = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

Driver::Driver(RunSetup setup)
    : setup_(std::move(setup)),
      stepper_(*setup_.geom, setup_.nx, setup_.nz, setup_.fsi) {
    assert(setup_.geom && setup_.geom->kind() == GeomKind::FlatSlab2D);
}

solute::StressField Driver::initial_stress(const ss::Stepper::State& s) const {
    const Layout& lay = stepper_.layout();
    StressField f = StressField::zeros(2, lay.nx, lay.nz);
    if (setup_.t0) {
        for (int i = 0; i < lay.nx; ++i) {
            const int i1 = (i + 1) % lay.nx;
            for (int j = 0; j < lay.nz; ++j) {
                const double z = 0.25 * (s.metrics.z_node(i, j) + s.metrics.z_node(i, j + 1) +
                                         s.metrics.z_node(i1, j) + s.metrics.z_node(i1, j + 1));
                const oldroyd::Mat t = setup_.t0(Vec(lay.xi_center(i), z));
                f.set(i, j, oldroyd::vec(t));
            }
        }
    }
    return f;
}

ss::Stepper::State Driver::initial_state() const {
    auto s = stepper_.make_state(setup_.eta0, setup_.eta_star, setup_.u0);
    // elliptic initial pressure; with the production data (zero initial
    // velocity) only the forcing and shell terms contribute
    const Layout& lay = stepper_.layout();
    const Metrics& m = s.metrics;
    stokes::SpectralPrecond prec(lay);

    robin::RobinInput in;
    in.robin_coeff = robin::top_area_element(m);
    for (auto& v : in.robin_coeff) v = 1.0 / v;
    in.robin_data.assign(static_cast<std::size_t>(lay.nx), 0.0);
    in.bottom_flux.assign(static_cast<std::size_t>(lay.nx), 0.0);

    FaceField v_faces = FaceField::zeros(lay);
    if (setup_.feeds.body_force) v_faces = setup_.feeds.body_force(0.0, m);
    const StressField t0f = initial_stress(s);
    {
        Grid2D t11(lay.nx, lay.nz), t12(lay.nx, lay.nz), t22(lay.nx, lay.nz);
        for (int i = 0; i < lay.nx; ++i)
            for (int j = 0; j < lay.nz; ++j) {
                t11(i, j) = t0f.comp[0](i, j);
                t12(i, j) = 0.5 * (t0f.comp[1](i, j) + t0f.comp[2](i, j));
                t22(i, j) = t0f.comp[3](i, j);
            }
        const FaceField divt = mac::div_cell_tensor(m, t11, t12, t22);
        v_faces.axpy(1.0, divt);
    }
    if (setup_.u0) {
        // subtract the discrete transport term of the sampled field
        const Grid2D fxi = mac::flux_xi(m, s.u);
        const Grid2D fz = mac::flux_zeta(m, s.u);
        const FaceField adv =
            mac::convect(m, fxi, fz, s.u, mac::WallTraces::zeros(lay.nx));
        v_faces.axpy(-1.0, adv);
    }

    std::vector<double> top_flux(static_cast<std::size_t>(lay.nx), 0.0);
    std::vector<double> bot_flux(static_cast<std::size_t>(lay.nx), 0.0);
    for (int i = 0; i < lay.nx; ++i) {
        const double zxi = m.zxi_zface(i, lay.nz);
        top_flux[static_cast<std::size_t>(i)] =
            v_faces.u2(i, lay.nz) -
            zxi * 0.5 * (v_faces.u1(i, lay.nz - 1) +
                         v_faces.u1((i + 1) % lay.nx, lay.nz - 1));
        bot_flux[static_cast<std::size_t>(i)] = v_faces.u2(i, 0);
    }
    in.rhs = robin::div_faces_with_wall_flux(m, v_faces, top_flux, bot_flux);

    // boundary data: forcing flux, viscous traction of the sampled initial
    // velocity, and the shell balance terms
    const std::vector<double> atop = robin::top_area_element(m);
    std::vector<double> visc_cols(static_cast<std::size_t>(lay.nx), 0.0);
    if (setup_.u0) {
        Grid2D zero_p(lay.nx, lay.nz, 0.0);
        visc_cols = ss::assemble_shell_load(m, s.u, zero_p, nullptr, nullptr, nullptr);
    }
    std::vector<double> shell_term(static_cast<std::size_t>(setup_.geom->shell_n()));
    {
        const auto lap_star = sfft::derivative_1d(setup_.eta_star, 2);
        const auto bilap_eta0 = sfft::derivative_1d(setup_.eta0, 4);
        std::vector<double> g0 =
            setup_.feeds.shell_force
                ? setup_.feeds.shell_force(0.0)
                : std::vector<double>(shell_term.size(), 0.0);
        for (std::size_t i = 0; i < shell_term.size(); ++i)
            shell_term[i] = lap_star[i] - bilap_eta0[i] + g0[i];
    }
    const std::vector<double> shell_f = sfft::resample_1d(shell_term, lay.nx);
    for (int i = 0; i < lay.nx; ++i) {
        const double a = atop[static_cast<std::size_t>(i)];
        const double shell_mid =
            0.5 * (shell_f[static_cast<std::size_t>(i)] +
                   shell_f[static_cast<std::size_t>((i + 1) % lay.nx)]);
        in.robin_data[static_cast<std::size_t>(i)] =
            -visc_cols[static_cast<std::size_t>(i)] / a  // viscous traction term
            + top_flux[static_cast<std::size_t>(i)] / a  // (f + divT - adv) . n_eta
            - shell_mid / a;
    }
    auto pres = robin::solve(m, in, prec, 1e-10);
    s.p = std::move(pres.p);
    return s;
}

double Driver::compatibility_error(const ss::Stepper::State& s) const {
    const Layout& lay = stepper_.layout();
    const std::vector<double> xi_f = sfft::resample_1d(setup_.eta_star, lay.nx);
    double err = 0;
    if (!setup_.u0) {
        for (double v : xi_f) err = std::max(err, std::abs(v));
        return err;
    }
    for (int i = 0; i < lay.nx; ++i) {
        const int i1 = (i + 1) % lay.nx;
        const double z = 0.5 * (s.metrics.z_node(i, lay.nz) + s.metrics.z_node(i1, lay.nz));
        const Vec u = setup_.u0(Vec(lay.xi_center(i), z));
        const double want =
            0.5 * (xi_f[static_cast<std::size_t>(i)] + xi_f[static_cast<std::size_t>(i1)]);
        err = std::max(err, std::abs(u[1] - want));
        err = std::max(err, std::abs(u[0]));
    }
    return err;
}

SmallnessReport Driver::check_smallness(const ss::Stepper::State& s,
                                        const StressField& t0) const {
    SmallnessReport rep;
    const Layout& lay = stepper_.layout();
    const Metrics& m = s.metrics;
    double v = 0;
    v += std::pow(sfft::sobolev_norm_1d(setup_.eta_star, 1), 2);
    v += std::pow(sfft::sobolev_norm_1d(setup_.eta0, 3), 2);
    {
        Grid2D c1, c2;
        mac::face_to_center(m, s.u, mac::WallTraces::zeros(lay.nx), c1, c2);
        const double w12 = std::pow(diag::cell_sobolev(m, c1, 1), 2) +
                           std::pow(diag::cell_sobolev(m, c2, 1), 2);
        v += w12;
    }
    v *= setup_.smallness_c;

    // time integral of the forcing and stress norms over the horizon,
    // midpoint samples on the initial geometry
    const int nsteps = std::max(1, static_cast<int>(std::round(setup_.t_end / setup_.dt)));
    double acc = 0;
    const double t_w12 = std::pow(diag::stress_sobolev(m, t0, 1), 2);
    for (int k = 0; k < nsteps; ++k) {
        const double t_mid = (k + 0.5) * setup_.dt;
        double f2 = 0, g2 = 0;
        if (setup_.feeds.body_force) {
            const FaceField f = setup_.feeds.body_force(t_mid, m);
            Grid2D c1, c2;
            mac::face_to_center(m, f, mac::WallTraces::zeros(lay.nx), c1, c2);
            f2 = std::pow(diag::cell_l2(m, c1), 2) + std::pow(diag::cell_l2(m, c2), 2);
        }
        if (setup_.feeds.shell_force) {
            const auto g = setup_.feeds.shell_force(t_mid);
            g2 = std::pow(sfft::l2_norm_1d(g), 2);
        }
        acc += setup_.dt * (f2 + g2 + t_w12);
    }
    rep.value = v + acc;
    rep.ok = rep.value <= setup_.smallness_eps;
    return rep;
}

WindowResult Driver::fixed_point_window(const ss::Stepper::State& s0,
                                        const StressField& stress_at_t0,
                                        double t_star, int window_index,
                                        const StressTraj* guess) const {
    const Layout& lay = stepper_.layout();
    const double dt = setup_.dt;
    const int nsteps = std::max(1, static_cast<int>(std::round(t_star / dt)));

    WindowResult out;
    StressTraj prev;
    prev.t0 = s0.t;
    prev.dt = dt;
    if (guess) {
        prev = *guess;
        assert(static_cast<int>(prev.levels.size()) == nsteps + 1);
    } else {
        prev.levels.assign(static_cast<std::size_t>(nsteps + 1), stress_at_t0);
    }

    const std::vector<double> eta_f0 = sfft::resample_1d(s0.eta, lay.nx);

    double dy_prev = -1;
    int consecutive_expanding = 0;

    for (int k = 1; k <= setup_.max_fp; ++k) {
        // solvent-structure pass under the frozen stress trajectory
        ss::Stepper::State s = s0;
        GridHistory hist(lay, setup_.geom->cutoff());
        hist.add_stamp(s.t, s.u, eta_f0);
        std::vector<ss::StepLedger> ledgers;
        std::vector<std::vector<double>> eta_lv{s.eta}, etat_lv{s.eta_t};
        std::vector<FaceField> u_lv{s.u};
        std::vector<Grid2D> p_lv{s.p};
        std::vector<std::vector<double>> eta_f_levels{eta_f0};

        for (int mstep = 0; mstep < nsteps; ++mstep) {
            ss::StressPair pair{&prev.levels[static_cast<std::size_t>(mstep)],
                                &prev.levels[static_cast<std::size_t>(mstep + 1)]};
            ledgers.push_back(stepper_.advance(s, dt, setup_.feeds, pair));
            const std::vector<double> eta_f = sfft::resample_1d(s.eta, lay.nx);
            hist.add_stamp(s.t, s.u, eta_f);
            eta_lv.push_back(s.eta);
            etat_lv.push_back(s.eta_t);
            u_lv.push_back(s.u);
            p_lv.push_back(s.p);
            eta_f_levels.push_back(eta_f);
        }

        // solute pass along the history
        const Metrics m0 = Metrics::from_displacement(lay, eta_f0, setup_.geom->cutoff());
        solute::StressInitFn t0fn = [&](const Vec& x) {
            return interp_stress(m0, setup_.geom->cutoff(), eta_f0, stress_at_t0, x);
        };
        std::vector<double> out_times(static_cast<std::size_t>(nsteps));
        for (int mstep = 1; mstep <= nsteps; ++mstep)
            out_times[static_cast<std::size_t>(mstep - 1)] = s0.t + mstep * dt;
        // cell-center heights per level, built once
        std::vector<Grid2D> zc_levels;
        zc_levels.reserve(eta_f_levels.size());
        for (const auto& ef : eta_f_levels) {
            const Metrics mm = Metrics::from_displacement(lay, ef, setup_.geom->cutoff());
            Grid2D zc(lay.nx, lay.nz);
            for (int i = 0; i < lay.nx; ++i) {
                const int i1 = (i + 1) % lay.nx;
                for (int j = 0; j < lay.nz; ++j)
                    zc(i, j) = 0.25 * (mm.z_node(i, j) + mm.z_node(i, j + 1) +
                                       mm.z_node(i1, j) + mm.z_node(i1, j + 1));
            }
            zc_levels.push_back(std::move(zc));
        }
        solute::SoluteGrid grid;
        grid.nx = lay.nx;
        grid.ny = lay.nz;
        grid.position = [&zc_levels, lay, t0 = s0.t, dt](double tau, int i, int j) {
            const int lvl = static_cast<int>(std::round((tau - t0) / dt));
            return Vec(lay.xi_center(i),
                       zc_levels[static_cast<std::size_t>(lvl)](i, j));
        };
        solute::TraceOptions topt;
        topt.eps_dom = 1e-6 * std::min(lay.hx, lay.hz);
        auto sol = solute::solve_solute_field(hist, grid, t0fn, s0.t, out_times, dt,
                                              topt, true);

        StressTraj cur;
        cur.t0 = s0.t;
        cur.dt = dt;
        cur.levels.reserve(static_cast<std::size_t>(nsteps + 1));
        cur.levels.push_back(stress_at_t0);
        for (auto& f : sol.series) cur.levels.push_back(std::move(f));
        out.report.max_symmetry_defect =
            std::max(out.report.max_symmetry_defect, sol.max_symmetry_defect);

        // norm ledger
        double ynorm = 0, xnorm = 0, dy = 0;
        for (int lvl = 0; lvl <= nsteps; ++lvl) {
            const Metrics mm = Metrics::from_displacement(
                lay, eta_f_levels[static_cast<std::size_t>(lvl)], setup_.geom->cutoff());
            const auto& tcur = cur.levels[static_cast<std::size_t>(lvl)];
            ynorm = std::max(ynorm, diag::stress_l2(mm, tcur));
            // X: W^{3,2} plus the differenced time derivative in W^{2,2}
            double x = diag::stress_sobolev(mm, tcur, 3);
            StressField dtev = StressField::zeros(2, lay.nx, lay.nz);
            const int la = std::max(0, lvl - 1), lb = std::min(nsteps, lvl + 1);
            const double span = (lb - la) * dt;
            for (std::size_t c = 0; c < dtev.comp.size(); ++c)
                for (std::size_t q = 0; q < dtev.comp[c].size(); ++q)
                    dtev.comp[c].data()[q] =
                        (cur.levels[static_cast<std::size_t>(lb)].comp[c].data()[q] -
                         cur.levels[static_cast<std::size_t>(la)].comp[c].data()[q]) /
                        span;
            x += diag::stress_sobolev(mm, dtev, 2);
            xnorm = std::max(xnorm, x);

            StressField diff = StressField::zeros(2, lay.nx, lay.nz);
            for (std::size_t c = 0; c < diff.comp.size(); ++c)
                for (std::size_t q = 0; q < diff.comp[c].size(); ++q)
                    diff.comp[c].data()[q] =
                        tcur.comp[c].data()[q] -
                        prev.levels[static_cast<std::size_t>(lvl)].comp[c].data()[q];
            dy = std::max(dy, diag::stress_l2(mm, diff));
        }
        if (k == 1) {
            out.report.x_first = xnorm;
            out.report.ball_r =
                setup_.ball_factor * std::max(xnorm, 1e-14);
        }
        if (xnorm > out.report.ball_r) out.report.ball_ok = false;

        FpRow row;
        row.window = window_index;
        row.k = k;
        row.dy = dy;
        row.x_norm = xnorm;
        row.y_norm = ynorm;
        row.rho = (dy_prev > 0) ? dy / dy_prev : -1.0;
        out.report.rows.push_back(row);
        out.report.dys.push_back(dy);
        if (row.rho >= 0) out.report.rho = std::max(out.report.rho, row.rho);
        out.report.iters = k;

        // bookkeeping for a possible accept
        out.end_state = std::move(s);
        out.stress = std::move(cur);
        out.ledgers = std::move(ledgers);
        out.eta_levels = std::move(eta_lv);
        out.etat_levels = std::move(etat_lv);
        out.u_levels = std::move(u_lv);
        out.p_levels = std::move(p_lv);

        if (dy <= setup_.tol_fp) {
            out.report.converged = true;
            break;
        }
        if (row.rho >= 1.0) {
            if (++consecutive_expanding >= 2) {
                out.report.non_contraction = true;
                break;
            }
        } else {
            consecutive_expanding = 0;
        }
        dy_prev = dy;
        prev = out.stress;
    }
    {
        double mineig = 1e300;
        for (const auto& lvlf : out.stress.levels)
            mineig = std::min(mineig, diag::spd_monitor(lvlf).min_eig);
        out.report.min_conformation_eig = mineig;
    }
    return out;
}

Trajectory Driver::run() const {
    Trajectory traj;
    const double dt = setup_.dt;

    ss::Stepper::State state;
    StressField stress0 = StressField::zeros(2, setup_.nx, setup_.nz);
    try {
        state = initial_state();
        stress0 = initial_stress(state);
        traj.compat_err = compatibility_error(state);
        traj.smallness = check_smallness(state, stress0);
    } catch (const std::exception& e) {
        traj.stop_reason = "subsolver_failure";
        traj.stop_detail = e.what();
        return traj;
    }

    traj.times.push_back(0.0);
    traj.eta.push_back(state.eta);
    traj.eta_t.push_back(state.eta_t);
    traj.u.push_back(state.u);
    traj.p.push_back(state.p);
    traj.stress.push_back(stress0);
    traj.min_conformation_eig = diag::spd_monitor(stress0).min_eig;

    double t_star = setup_.t_star;
    const double floor_len = setup_.min_window_steps * dt;
    int fast_windows = 0;
    int window_index = 0;

    double t = 0.0;
    while (t < setup_.t_end - 1e-12) {
        t_star = std::min(t_star, setup_.t_end - t);
        t_star = std::max(t_star, std::min(floor_len, setup_.t_end - t));
        // snap to a whole number of steps
        const int nsteps = std::max(1, static_cast<int>(std::round(t_star / dt)));
        const double len = nsteps * dt;

        WindowResult res;
        try {
            res = fixed_point_window(state, stress0, len, window_index);
        } catch (const DegeneracyError& e) {
            traj.stop_reason = "degeneracy";
            traj.stop_detail = e.what();
            return traj;
        } catch (const std::exception& e) {
            traj.stop_reason = "subsolver_failure";
            traj.stop_detail = e.what();
            return traj;
        }
        for (const auto& r : res.report.rows) traj.fp_rows.push_back(r);

        if (!res.report.converged) {
            if (res.report.non_contraction || res.report.iters >= setup_.max_fp) {
                if (len <= floor_len + 1e-12) {
                    traj.stop_reason = "non_contraction";
                    std::ostringstream os;
                    os << "window at t=" << t << " would not contract at the floor length "
                       << floor_len;
                    traj.stop_detail = os.str();
                    return traj;
                }
                t_star = 0.5 * len;
                fast_windows = 0;
                continue;  // retry shorter window from the same state
            }
        }

        // accept the window
        window_index += 1;
        traj.window_starts.push_back(t);
        traj.window_lengths.push_back(len);
        for (int lvl = 1; lvl < static_cast<int>(res.eta_levels.size()); ++lvl) {
            traj.times.push_back(t + lvl * dt);
            traj.eta.push_back(res.eta_levels[static_cast<std::size_t>(lvl)]);
            traj.eta_t.push_back(res.etat_levels[static_cast<std::size_t>(lvl)]);
            traj.u.push_back(res.u_levels[static_cast<std::size_t>(lvl)]);
            traj.p.push_back(res.p_levels[static_cast<std::size_t>(lvl)]);
            traj.stress.push_back(res.stress.levels[static_cast<std::size_t>(lvl)]);
        }
        for (auto& l : res.ledgers) traj.ledgers.push_back(l);
        traj.min_conformation_eig =
            std::min(traj.min_conformation_eig, res.report.min_conformation_eig);

        state = std::move(res.end_state);
        stress0 = res.stress.levels.back();
        t += len;

        if (res.report.iters <= 9) {
            if (++fast_windows >= 3) {
                t_star = 2.0 * len;
                fast_windows = 0;
            } else {
                t_star = len;
            }
        } else {
            fast_windows = 0;
            t_star = len;
        }
    }
    traj.stop_reason = "completed";
    return traj;
}

}  // namespace polyfsi::coupling
