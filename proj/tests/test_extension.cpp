#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "polyfsi/extension.hpp"
#include "polyfsi/shell_fft.hpp"

using namespace polyfsi;
using namespace polyfsi::ext;
using mac::BcMode;
using mac::FaceField;
using mac::Layout;
using mac::Metrics;

namespace {

ShellField shell_cos(const ReferenceGeometry& g, double amp, int mode) {
    ShellField f = g.zero_shell_field();
    for (int i = 0; i < f.n1(); ++i) f.at(i) = amp * std::cos(mode * g.shell_coord(i));
    return f;
}

}  // namespace

TEST_CASE("flux correction") {
    auto slab = ReferenceGeometry::flat_slab_2d(64);
    ShellField eta0 = slab.zero_shell_field();

    SUBCASE("zero datum") {
        CHECK(correction(slab, eta0, eta0) == 0.0);
    }
    SUBCASE("mean-zero datum on the flat slab") {
        CHECK(std::abs(correction(slab, eta0, shell_cos(slab, 1.0, 1))) <= 1e-14);
    }
    SUBCASE("constant datum is its own weighted mean") {
        ShellField one = slab.zero_shell_field();
        one.g.fill(1.0);
        CHECK(correction(slab, eta0, one) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("constant datum under displacement, still exact for the slab") {
        ShellField one = slab.zero_shell_field();
        one.g.fill(1.0);
        CHECK(correction(slab, shell_cos(slab, 0.1, 2), one) ==
              doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("slab lift: divergence, support, trace") {
    auto slab = ReferenceGeometry::flat_slab_2d(128);
    ShellField eta = shell_cos(slab, 0.08, 1);
    ShellField xi = shell_cos(slab, 1.0, 1);

    auto efield = solenoidal_extension(slab, eta, xi, 64, 64);
    const Layout& lay = efield.lay;

    SUBCASE("zero datum gives the zero field") {
        auto z = solenoidal_extension(slab, eta, slab.zero_shell_field(), 32, 32);
        for (std::size_t k = 0; k < z.phi.u1.size(); ++k) CHECK(z.phi.u1.data()[k] == 0.0);
        for (std::size_t k = 0; k < z.phi.u2.size(); ++k) CHECK(z.phi.u2.data()[k] == 0.0);
    }
    SUBCASE("discrete divergence vanishes") {
        CHECK(mac::max_divergence(efield.metrics, efield.phi) <= 1e-12);
    }
    SUBCASE("support confined to the inner tube") {
        // rows fully below zeta = 1 - ell stay exactly zero
        for (int i = 0; i < lay.nx; ++i)
            for (int j = 0; j < lay.nz; ++j) {
                if (lay.zeta_node(j + 1) < 1.0 - slab.ell()) {
                    CHECK(efield.phi.u1(i, j) == 0.0);
                    CHECK(efield.phi.u2(i, j) == 0.0);
                }
            }
    }
    SUBCASE("normal trace carries the corrected datum") {
        for (int i = 0; i < lay.nx; ++i) {
            const double want =
                0.5 * (std::cos(lay.xi_node(i)) + std::cos(lay.xi_node(i + 1 == lay.nx ? 0 : i + 1)));
            CHECK(efield.phi.u2(i, lay.nz) == doctest::Approx(want).epsilon(1e-10));
        }
        // tangential trace vanishes: the two face rows below the boundary
        // are inside the flat collar of the cutoff
        for (int i = 0; i < lay.nx; ++i) {
            CHECK(efield.phi.u1(i, lay.nz - 1) == 0.0);
            CHECK(efield.phi.u1(i, lay.nz - 2) == 0.0);
        }
    }
    SUBCASE("boundary trace converges at second order in the shell datum") {
        // measured against the pointwise datum at face centers
        auto trace_err = [&](int nx) {
            auto ef = solenoidal_extension(slab, eta, xi, nx, nx);
            double err = 0;
            for (int i = 0; i < nx; ++i) {
                const double xc = ef.lay.xi_center(i);
                const double want = std::cos(xc);
                err = std::max(err, std::abs(ef.phi.u2(i, nx) - want));
            }
            return err;
        };
        const double e1 = trace_err(32), e2 = trace_err(64), e3 = trace_err(128);
        CHECK(observed_order(e1, e2) >= 1.9);
        CHECK(observed_order(e2, e3) >= 1.9);
    }
}

TEST_CASE("stream-function oracle at the boundary for the flat slab") {
    // eta = 0, xi = cos: psi(y) = sin(y) at the boundary row up to the
    // midpoint-rule constant
    auto slab = ReferenceGeometry::flat_slab_2d(64);
    auto ef = solenoidal_extension(slab, slab.zero_shell_field(), shell_cos(slab, 1.0, 1),
                                   64, 32);
    // reconstruct S_i from the built fluxes: the top-row trace integrates
    // back to sin with the face-average and midpoint-sum factors
    const double h = ef.lay.hx;
    const double factor = std::cos(h / 2) * (h / 2) / std::sin(h / 2);
    double s = 0;
    double err = 0;
    for (int i = 0; i < 64; ++i) {
        const double hand = factor * std::sin(ef.lay.xi_node(i));
        err = std::max(err, std::abs(s - hand));
        s += h * ef.phi.u2(i, ef.lay.nz);
    }
    CHECK(err <= 1e-12);
    CHECK(factor == doctest::Approx(1.0).epsilon(1e-2));  // sin(y) up to O(h^2)
}

TEST_CASE("lift is linear in the datum") {
    auto slab = ReferenceGeometry::flat_slab_2d(64);
    ShellField eta = shell_cos(slab, 0.05, 2);
    ShellField a = shell_cos(slab, 0.7, 1);
    ShellField b = shell_cos(slab, -0.4, 3);
    ShellField comb = slab.zero_shell_field();
    for (int i = 0; i < 64; ++i) comb.at(i) = 2.0 * a.at(i) - 3.0 * b.at(i);

    auto ea = solenoidal_extension(slab, eta, a, 32, 32);
    auto eb = solenoidal_extension(slab, eta, b, 32, 32);
    auto ec = solenoidal_extension(slab, eta, comb, 32, 32);
    for (std::size_t k = 0; k < ec.phi.u1.size(); ++k)
        CHECK(std::abs(ec.phi.u1.data()[k] -
                       (2.0 * ea.phi.u1.data()[k] - 3.0 * eb.phi.u1.data()[k])) <= 1e-12);
    for (std::size_t k = 0; k < ec.phi.u2.size(); ++k)
        CHECK(std::abs(ec.phi.u2.data()[k] -
                       (2.0 * ea.phi.u2.data()[k] - 3.0 * eb.phi.u2.data()[k])) <= 1e-12);
}

TEST_CASE("lift norm stays bounded by the datum norms under refinement") {
    auto slab = ReferenceGeometry::flat_slab_2d(128);
    ShellField eta = shell_cos(slab, 0.1, 1);
    ShellField xi = shell_cos(slab, 1.0, 2);
    std::span<const double> xs(xi.g.data(), 128), es(eta.g.data(), 128);
    const double xi_w12 = sfft::sobolev_norm_1d(xs, 1);
    auto deta = sfft::derivative_1d(es, 1);
    double xe = 0;
    for (int i = 0; i < 128; ++i) xe += xi.at(i) * xi.at(i) * deta[i] * deta[i];
    const double xi_grad = std::sqrt(xe * (2.0 * M_PI / 128));
    const double denom = xi_w12 + xi_grad;

    double prev = 0;
    std::vector<double> ratios;
    for (int n : {256, 512, 1024}) {
        auto ef = solenoidal_extension(slab, eta, xi, n, n);
        mac::WallTraces tr = mac::WallTraces::zeros(n);
        const auto g = mac::velocity_gradient(ef.metrics, ef.phi, tr);
        const FaceField vol = mac::face_volumes(ef.metrics);
        double l2 = mac::inner(vol, ef.phi, ef.phi);
        double h1 = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double w = ef.metrics.jac_cell(i, j) * ef.lay.hx * ef.lay.hz;
                h1 += w * (g.g11(i, j) * g.g11(i, j) + g.g12(i, j) * g.g12(i, j) +
                           g.g21(i, j) * g.g21(i, j) + g.g22(i, j) * g.g22(i, j));
            }
        const double w12 = std::sqrt(l2 + h1);
        const double C = w12 / denom;
        CHECK(std::isfinite(C));
        if (prev > 0) ratios.push_back(C / prev);
        prev = C;
    }
    for (double r : ratios) CHECK(r <= 1.1);
}

TEST_CASE("transpose pairs exactly with the lift") {
    auto lay = Layout::make(48, 32, BcMode::SlabWalls);
    std::vector<double> eta(lay.nx);
    for (int i = 0; i < lay.nx; ++i) eta[i] = 0.07 * std::cos(2 * lay.xi_node(i));
    CutoffProfile pc(0.5);
    Metrics m = Metrics::from_displacement(lay, eta, pc);

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> xi(lay.nx);
        for (auto& v : xi) v = dist(rng);
        FaceField res = FaceField::zeros(lay);
        for (std::size_t k = 0; k < res.u1.size(); ++k) res.u1.data()[k] = dist(rng);
        for (std::size_t k = 0; k < res.u2.size(); ++k) res.u2.data()[k] = dist(rng);

        auto built = build_extension(m, xi, pc);
        double lhs = 0;
        for (std::size_t k = 0; k < res.u1.size(); ++k)
            lhs += built.phi.u1.data()[k] * res.u1.data()[k];
        for (std::size_t k = 0; k < res.u2.size(); ++k)
            lhs += built.phi.u2.data()[k] * res.u2.data()[k];

        auto gxi = extension_transpose(m, res, pc);
        double rhs = 0;
        for (int i = 0; i < lay.nx; ++i) rhs += xi[static_cast<std::size_t>(i)] * gxi[static_cast<std::size_t>(i)];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("3d smoke lift") {
    const int n = 16, nz = 32;
    Grid2D xi(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            xi(i, j) = std::cos(2.0 * M_PI * i / n) * std::sin(2.0 * M_PI * j / n) + 0.3;
    auto e = solenoidal_extension_3d(xi, nz, 0.5);
    CHECK(e.max_divergence <= 1e-12);
    CHECK(e.K == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(e.trace_error <= 0.02);
    // support: everything below the tube is exactly zero
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < nz / 4; ++k) {
                CHECK(e.u1[e.idx(i, j, k, nz)] == 0.0);
                CHECK(e.u3[e.idx(i, j, k, nz + 1)] == 0.0);
            }
    // refinement shrinks the trace error at second order
    Grid2D xi2(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j)
            xi2(i, j) =
                std::cos(2.0 * M_PI * i / (2 * n)) * std::sin(2.0 * M_PI * j / (2 * n)) + 0.3;
    auto e2 = solenoidal_extension_3d(xi2, nz, 0.5);
    CHECK(observed_order(e.trace_error, e2.trace_error) >= 1.7);
}
