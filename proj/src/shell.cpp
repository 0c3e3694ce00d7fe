#include "polyfsi/shell.hpp"

#include <cassert>
#include <complex>

#include "polyfsi/shell_fft.hpp"

namespace polyfsi {

ShellIntegrator::Step ShellIntegrator::step(std::span<const double> eta,
                                            std::span<const double> eta_t,
                                            std::span<const double> rhs_mid,
                                            double dt, bool constrain_mean) const {
    assert(static_cast<int>(eta.size()) == n_);
    std::vector<std::complex<double>> ce, cv, cr;
    sfft::forward_1d(eta, ce);
    sfft::forward_1d(eta_t, cv);
    sfft::forward_1d(rhs_mid, cr);

    Step out;
    double lambda = 0.0;
    if (constrain_mean) {
        // close the k = 0 mode: v0' = v0 + dt (r0 + lambda) == 0
        lambda = -(cv[0].real() / dt + cr[0].real());
        cr[0] += lambda;
    }

    for (int k = 0; k < n_ / 2 + 1; ++k) {
        const double a = static_cast<double>(k) * k;       // damping weight
        const double b = a * a;                            // stiffness weight
        const std::complex<double> e = ce[k], v = cv[k], r = cr[k];
        const double den = 1.0 + 0.5 * dt * a + 0.25 * dt * dt * b;
        const std::complex<double> vnew =
            (v * (1.0 - 0.5 * dt * a - 0.25 * dt * dt * b) - dt * b * e + dt * r) / den;
        const std::complex<double> vmid = 0.5 * (v + vnew);
        cv[k] = vnew;
        ce[k] = e + dt * vmid;
    }

    out.eta.resize(n_);
    out.eta_t.resize(n_);
    sfft::backward_1d(ce, out.eta);
    sfft::backward_1d(cv, out.eta_t);
    out.lambda = lambda;
    return out;
}

std::vector<double> ShellIntegrator::solve_biharmonic(std::span<const double> rhs) {
    const int n = static_cast<int>(rhs.size());
    std::vector<std::complex<double>> c;
    sfft::forward_1d(rhs, c);
    c[0] = 0.0;
    for (int k = 1; k < n / 2 + 1; ++k) {
        const double b = std::pow(static_cast<double>(k), 4);
        c[k] /= b;
    }
    std::vector<double> out(n);
    sfft::backward_1d(c, out);
    return out;
}

}  // namespace polyfsi
