#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <random>

#include "polyfsi/shell.hpp"
#include "polyfsi/shell_fft.hpp"

using namespace polyfsi;

namespace {

// Closed-form solution of a'' + (k^2) a' + (k^4) a = g (constant forcing,
// zero initial state). Underdamped for k^4 > k^4/4, i.e. every k >= 1.
double damped_mode_exact(double k, double g, double t) {
    const double a = k * k, b = a * a;
    const double wd = std::sqrt(b - 0.25 * a * a);
    const double part = g / b;
    // a(t) = part * (1 - e^{-at/2} (cos wd t + (a/2)/wd sin wd t))
    return part * (1.0 - std::exp(-0.5 * a * t) *
                             (std::cos(wd * t) + 0.5 * a / wd * std::sin(wd * t)));
}

double damped_mode_exact_vel(double k, double g, double t) {
    const double a = k * k, b = a * a;
    const double wd = std::sqrt(b - 0.25 * a * a);
    const double part = g / b;
    // derivative of the expression above
    const double ex = std::exp(-0.5 * a * t);
    const double c = std::cos(wd * t), s = std::sin(wd * t);
    const double inner = c + 0.5 * a / wd * s;
    const double dinner = -wd * s + 0.5 * a * c;
    return part * (0.5 * a * ex * inner - ex * dinner);
}

}  // namespace

TEST_CASE("single forced mode matches the damped oscillator solution") {
    const int n = 64;
    ShellIntegrator shell(n);
    const double g0 = 1.0, dt = 1e-3;
    const int k = 1;

    std::vector<double> eta(n, 0.0), vel(n, 0.0), rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = g0 * std::cos(k * 2.0 * M_PI * i / n);

    const int steps = 1000;
    for (int s = 0; s < steps; ++s) {
        auto r = shell.step(eta, vel, rhs, dt, false);
        eta = std::move(r.eta);
        vel = std::move(r.eta_t);
    }
    const double want = damped_mode_exact(k, g0, steps * dt);
    const double want_v = damped_mode_exact_vel(k, g0, steps * dt);
    double err = 0, err_v = 0;
    for (int i = 0; i < n; ++i) {
        const double c = std::cos(k * 2.0 * M_PI * i / n);
        err = std::max(err, std::abs(eta[i] - want * c));
        err_v = std::max(err_v, std::abs(vel[i] - want_v * c));
    }
    CHECK(err <= 1e-6);
    CHECK(err_v <= 1e-6);
}

TEST_CASE("static solution is a fixed point and the relaxation target") {
    const int n = 64;
    ShellIntegrator shell(n);
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) {
        const double y = 2.0 * M_PI * i / n;
        rhs[i] = std::cos(y) - 0.5 * std::sin(3 * y);
    }
    auto stat = ShellIntegrator::solve_biharmonic(rhs);

    SUBCASE("stationarity to roundoff") {
        std::vector<double> vel(n, 0.0);
        auto r = shell.step(stat, vel, rhs, 0.01, false);
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(r.eta[i] - stat[i]) <= 1e-13);
            CHECK(std::abs(r.eta_t[i]) <= 1e-12);
        }
    }
    SUBCASE("relaxation from rest converges to it") {
        std::vector<double> eta(n, 0.0), vel(n, 0.0);
        const double dt = 0.02;
        for (int s = 0; s < 3000; ++s) {
            auto r = shell.step(eta, vel, rhs, dt, false);
            eta = std::move(r.eta);
            vel = std::move(r.eta_t);
        }
        double err = 0;
        for (int i = 0; i < n; ++i) err = std::max(err, std::abs(eta[i] - stat[i]));
        CHECK(err <= 1e-8);
    }
}

TEST_CASE("trapezoid closes the quadratic energy ledger exactly") {
    const int n = 128;
    ShellIntegrator shell(n);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);

    std::vector<double> eta(n), vel(n), rhs(n);
    for (int kk = 1; kk <= 6; ++kk) {
        const double a = dist(rng), b = dist(rng), c = dist(rng);
        for (int i = 0; i < n; ++i) {
            const double y = 2.0 * M_PI * i / n;
            eta[i] += 0.2 * a * std::cos(kk * y);
            vel[i] += 0.2 * b * std::sin(kk * y);
            rhs[i] += c * std::cos(kk * y);
        }
    }

    const double dt = 0.01, h = 2.0 * M_PI / n;
    for (int s = 0; s < 20; ++s) {
        const double e_kin0 = 0.5 * std::pow(sfft::l2_norm_1d(vel), 2);
        const double e_el0 = 0.5 * std::pow(sfft::seminorm_1d(eta, 2), 2);
        auto r = shell.step(eta, vel, rhs, dt, false);

        std::vector<double> vmid(n);
        for (int i = 0; i < n; ++i) vmid[i] = 0.5 * (vel[i] + r.eta_t[i]);
        const double e_kin1 = 0.5 * std::pow(sfft::l2_norm_1d(r.eta_t), 2);
        const double e_el1 = 0.5 * std::pow(sfft::seminorm_1d(r.eta, 2), 2);
        const double diss = std::pow(sfft::seminorm_1d(vmid, 1), 2);
        double work = 0;
        for (int i = 0; i < n; ++i) work += rhs[i] * vmid[i] * h;

        const double resid = (e_kin1 + e_el1) - (e_kin0 + e_el0) + dt * diss - dt * work;
        CHECK(std::abs(resid) <= 1e-13 * (1.0 + e_kin0 + e_el0));

        eta = std::move(r.eta);
        vel = std::move(r.eta_t);
    }
}

TEST_CASE("mean constraint freezes the mean velocity and volume") {
    const int n = 64;
    ShellIntegrator shell(n);
    std::vector<double> eta(n, 0.0), vel(n, 0.0), rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = 1.0 + std::cos(2.0 * M_PI * i / n);

    double mean0 = 0;
    for (int s = 0; s < 100; ++s) {
        auto r = shell.step(eta, vel, rhs, 0.01, true);
        eta = std::move(r.eta);
        vel = std::move(r.eta_t);
        double mv = 0, me = 0;
        for (int i = 0; i < n; ++i) {
            mv += vel[i];
            me += eta[i];
        }
        CHECK(std::abs(mv / n) <= 1e-13);
        if (s == 0) mean0 = me / n;
        CHECK(std::abs(me / n - mean0) <= 1e-13);
        // the multiplier balances the applied mean load
        CHECK(r.lambda == doctest::Approx(-1.0).epsilon(1e-10));
    }
}
