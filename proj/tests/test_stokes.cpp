#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "polyfsi/stokes.hpp"

using namespace polyfsi;
using namespace polyfsi::mac;
using namespace polyfsi::stokes;

namespace {

// Taylor-Green mode on the periodic box: a = 1 (xi), b = 2 pi (zeta),
// decay rate nu (a^2 + b^2) per component with nu = 1.
struct TaylorGreen {
    double a = 1.0, b = 2.0 * M_PI, A = 1.0;
    double rate() const { return a * a + b * b; }
    double u1(double x, double z, double t) const {
        return A * std::sin(a * x) * std::cos(b * z) * std::exp(-rate() * t);
    }
    double u2(double x, double z, double t) const {
        return -A * a / b * std::cos(a * x) * std::sin(b * z) * std::exp(-rate() * t);
    }
};

FaceField sample_tg(const Layout& lay, const TaylorGreen& tg, double t) {
    FaceField u = FaceField::zeros(lay);
    for (int i = 0; i < lay.nx; ++i) {
        for (int j = 0; j < lay.nz; ++j)
            u.u1(i, j) = tg.u1(lay.xi_node(i), lay.zeta_center(j), t);
        for (int j = 0; j < u.u2.ny(); ++j)
            u.u2(i, j) = tg.u2(lay.xi_center(i), lay.zeta_node(j), t);
    }
    return u;
}

double l2_error(const Metrics& m, const FaceField& u, const FaceField& ref) {
    const FaceField vol = face_volumes(m);
    double e = 0, norm = 0;
    for (std::size_t k = 0; k < u.u1.size(); ++k) {
        const double d = u.u1.data()[k] - ref.u1.data()[k];
        e += vol.u1.data()[k] * d * d;
        norm += vol.u1.data()[k];
    }
    for (std::size_t k = 0; k < u.u2.size(); ++k) {
        const double d = u.u2.data()[k] - ref.u2.data()[k];
        e += vol.u2.data()[k] * d * d;
    }
    (void)norm;
    return std::sqrt(e);
}

// run the homogeneous step on a static geometry n_steps times
FaceField run_stokes(const Metrics& m, const SpectralPrecond& prec, FaceField u,
                     const FaceField& forcing_weighted, double dt, int n_steps,
                     Grid2D* p_inout = nullptr) {
    Grid2D p = p_inout ? *p_inout : Grid2D(m.lay.nx, m.lay.nz, 0.0);
    for (int s = 0; s < n_steps; ++s) {
        auto res = stokes_step_homogeneous(m, m, m, u, forcing_weighted, p, dt, prec);
        u = std::move(res.w);
        for (std::size_t k = 0; k < p.size(); ++k) p.data()[k] += res.q.data()[k];
    }
    if (p_inout) *p_inout = p;
    return u;
}

}  // namespace

TEST_CASE("zero data is a fixed point") {
    auto lay = Layout::make(16, 16, BcMode::SlabWalls);
    Metrics m = Metrics::identity_box(lay);
    SpectralPrecond prec(lay);
    FaceField u = FaceField::zeros(lay);
    auto res = stokes_step_homogeneous(m, m, m, u, FaceField::zeros(lay),
                                       Grid2D(16, 16, 0.0), 0.01, prec);
    for (std::size_t k = 0; k < res.w.u1.size(); ++k) CHECK(res.w.u1.data()[k] == 0.0);
    for (std::size_t k = 0; k < res.w.u2.size(); ++k) CHECK(res.w.u2.data()[k] == 0.0);
    for (std::size_t k = 0; k < res.q.size(); ++k) CHECK(res.q.data()[k] == 0.0);
}

TEST_CASE("taylor-green decay on the periodic box") {
    const TaylorGreen tg;
    auto lay = Layout::make(64, 64, BcMode::Periodic);
    Metrics m = Metrics::identity_box(lay);
    SpectralPrecond prec(lay);

    FaceField u = sample_tg(lay, tg, 0.0);
    // project the sampled field onto the discretely divergence-free space
    auto pr = project(m, u, 1.0, prec, 1e-12, 500);
    CHECK(pr.div_after <= 1e-11);

    const double T = 0.02;
    const int steps = 40;
    u = run_stokes(m, prec, u, FaceField::zeros(lay), T / steps, steps);

    // energy decays at the analytic rate e^{-2 nu (a^2+b^2) t}
    const FaceField vol = face_volumes(m);
    const double e0 = inner(vol, sample_tg(lay, tg, 0.0), sample_tg(lay, tg, 0.0));
    const double eT = inner(vol, u, u);
    const double want = std::exp(-2.0 * tg.rate() * T);
    CHECK(eT / e0 == doctest::Approx(want).epsilon(2e-3));
}

TEST_CASE("taylor-green convergence orders") {
    const TaylorGreen tg;

    SUBCASE("space, at small dt") {
        auto err_at = [&](int n) {
            auto lay = Layout::make(n, n, BcMode::Periodic);
            Metrics m = Metrics::identity_box(lay);
            SpectralPrecond prec(lay);
            FaceField u = sample_tg(lay, tg, 0.0);
            project(m, u, 1.0, prec, 1e-13, 800);
            const double T = 0.01;
            const int steps = std::max(16, 2 * n * n / 64);  // dt ~ h^2
            u = run_stokes(m, prec, u, FaceField::zeros(lay), T / steps, steps);
            FaceField ref = sample_tg(lay, tg, T);
            project(m, ref, 1.0, prec, 1e-13, 800);
            return l2_error(m, u, ref);
        };
        const double e32 = err_at(32), e64 = err_at(64), e128 = err_at(128);
        CHECK(observed_order(e32, e64) >= 1.9);
        CHECK(observed_order(e64, e128) >= 1.9);
    }
    SUBCASE("time, against a fine-step reference on a fixed grid") {
        auto lay = Layout::make(32, 32, BcMode::Periodic);
        Metrics m = Metrics::identity_box(lay);
        SpectralPrecond prec(lay);
        FaceField u0 = sample_tg(lay, tg, 0.0);
        project(m, u0, 1.0, prec, 1e-13, 800);
        const double T = 0.02;
        auto solve_with = [&](int steps) {
            return run_stokes(m, prec, u0, FaceField::zeros(lay), T / steps, steps);
        };
        const FaceField ref = solve_with(512);
        const double e1 = l2_error(m, solve_with(8), ref);
        const double e2 = l2_error(m, solve_with(16), ref);
        const double e3 = l2_error(m, solve_with(32), ref);
        CHECK(observed_order(e1, e2) >= 1.9);
        CHECK(observed_order(e2, e3) >= 1.9);
    }
}

TEST_CASE("steady channel flow under a body force") {
    auto solve_at = [&](int n) {
        auto lay = Layout::make(8, n, BcMode::SlabWalls);
        Metrics m = Metrics::identity_box(lay);
        SpectralPrecond prec(lay);
        const FaceField vol = face_volumes(m);
        const double f0 = 1.0;
        FaceField forcing = FaceField::zeros(lay);
        for (int i = 0; i < lay.nx; ++i)
            for (int j = 0; j < lay.nz; ++j) forcing.u1(i, j) = vol.u1(i, j) * f0;

        FaceField u = FaceField::zeros(lay);
        Grid2D p(lay.nx, lay.nz, 0.0);
        // march to steady state
        u = run_stokes(m, prec, u, forcing, 0.05, 400, &p);
        double err = 0;
        for (int i = 0; i < lay.nx; ++i)
            for (int j = 0; j < lay.nz; ++j) {
                const double z = lay.zeta_center(j);
                const double want = 0.5 * f0 * z * (1.0 - z);
                err = std::max(err, std::abs(u.u1(i, j) - want));
            }
        return err;
    };
    const double e16 = solve_at(16), e32 = solve_at(32);
    CHECK(e16 <= 2e-3);
    CHECK(observed_order(e16, e32) >= 1.9);
}

TEST_CASE("projection annihilates gradients and preserves stream fields on a bumped slab") {
    auto lay = Layout::make(32, 32, BcMode::SlabWalls);
    std::vector<double> eta(lay.nx);
    for (int i = 0; i < lay.nx; ++i) eta[i] = 0.1 * std::cos(lay.xi_node(i));
    Metrics m = Metrics::from_displacement(lay, eta, CutoffProfile(0.5));
    SpectralPrecond prec(lay);

    FaceField u = FaceField::zeros(lay);
    // start from a gradient plus small noise
    Grid2D q0(lay.nx, lay.nz);
    for (int i = 0; i < lay.nx; ++i)
        for (int j = 0; j < lay.nz; ++j)
            q0(i, j) = std::sin(lay.xi_center(i)) + 0.3 * lay.zeta_center(j) * lay.zeta_center(j);
    const FaceField g = grad_dual(m, q0);
    u.axpy(1.0, g);
    auto res = project(m, u, 1.0, prec, 1e-12, 800);
    CHECK(res.div_after <= 1e-9);
    CHECK(res.stats.iters <= 60);
    // the projected field is (numerically) zero: a pure dual gradient has no
    // divergence-free part
    double umax = 0;
    for (std::size_t k = 0; k < u.u1.size(); ++k)
        umax = std::max(umax, std::abs(u.u1.data()[k]));
    for (std::size_t k = 0; k < u.u2.size(); ++k)
        umax = std::max(umax, std::abs(u.u2.data()[k]));
    CHECK(umax <= 1e-10);
}

TEST_CASE("viscous energy dissipates at the strain-form rate over one step") {
    // CN identity: (E1 - E0)/dt = -2 ||D(u_mid)||^2 exactly (no forcing,
    // static geometry, projection off)
    auto lay = Layout::make(24, 24, BcMode::SlabWalls);
    std::vector<double> eta(lay.nx);
    for (int i = 0; i < lay.nx; ++i) eta[i] = 0.08 * std::sin(lay.xi_node(i));
    Metrics m = Metrics::from_displacement(lay, eta, CutoffProfile(0.5));
    SpectralPrecond prec(lay);
    const FaceField vol = face_volumes(m);
    const WallTraces tr0 = WallTraces::zeros(lay.nx);

    // divergence-free zero-trace start
    FaceField u = FaceField::zeros(lay);
    for (int i = 0; i < lay.nx; ++i)
        for (int j = 0; j < lay.nz; ++j)
            u.u1(i, j) = std::sin(lay.xi_node(i)) *
                         std::pow(std::sin(M_PI * lay.zeta_center(j)), 2);
    project(m, u, 1.0, prec, 1e-13, 800);

    const double dt = 5e-3;
    // one viscous CN solve without projection
    auto apply = [&](const FaceField& w) {
        FaceField aw = apply_viscous(m, w, tr0);
        FaceField out = FaceField::zeros(lay);
        for (int i = 0; i < lay.nx; ++i) {
            for (int j = 0; j < lay.nz; ++j)
                out.u1(i, j) = vol.u1(i, j) * w.u1(i, j) / dt + 0.5 * aw.u1(i, j);
            for (int j = 1; j < lay.nz; ++j)
                out.u2(i, j) = vol.u2(i, j) * w.u2(i, j) / dt + 0.5 * aw.u2(i, j);
        }
        return out;
    };
    auto precond = [&](const FaceField& r) { return prec.helmholtz(r, 1.0 / dt); };
    FaceField rhs = FaceField::zeros(lay);
    const FaceField au = apply_viscous(m, u, tr0);
    for (int i = 0; i < lay.nx; ++i) {
        for (int j = 0; j < lay.nz; ++j)
            rhs.u1(i, j) = vol.u1(i, j) * u.u1(i, j) / dt - 0.5 * au.u1(i, j);
        for (int j = 1; j < lay.nz; ++j)
            rhs.u2(i, j) = vol.u2(i, j) * u.u2(i, j) / dt - 0.5 * au.u2(i, j);
    }
    FaceField unew = u;
    auto st = pcg_faces(apply, precond, rhs, unew, 1e-13, 1000);
    CHECK(st.ok);

    FaceField umid = u;
    umid.axpy(1.0, unew);
    umid.scale(0.5);
    const double e0 = 0.5 * inner(vol, u, u);
    const double e1 = 0.5 * inner(vol, unew, unew);
    const double diss = dissipation(m, umid, tr0);
    const double resid = (e1 - e0) + dt * diss;
    CHECK(std::abs(resid) <= 1e-10 * std::max(1.0, e0));
}
