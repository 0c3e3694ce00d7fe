#include "polyfsi/shell_fft.hpp"

#include <fftw3.h>

#include <cassert>
#include <map>
#include <mutex>

namespace polyfsi::sfft {

namespace {

std::mutex plan_mutex;

struct Plans1D {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

// One plan pair per transform length, created against aligned scratch and
// executed with the new-array interface.
Plans1D& plans_1d(int n) {
    static std::map<int, Plans1D> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    Plans1D p;
    double* r = fftw_alloc_real(n);
    fftw_complex* c = fftw_alloc_complex(n / 2 + 1);
    p.fwd = fftw_plan_dft_r2c_1d(n, r, c, FFTW_ESTIMATE);
    p.bwd = fftw_plan_dft_c2r_1d(n, c, r, FFTW_ESTIMATE);
    fftw_free(r);
    fftw_free(c);
    return cache.emplace(n, p).first->second;
}

struct Plans2D {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

Plans2D& plans_2d(int n0, int n1) {
    static std::map<std::pair<int, int>, Plans2D> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(n0, n1);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Plans2D p;
    double* r = fftw_alloc_real(static_cast<std::size_t>(n0) * n1);
    fftw_complex* c = fftw_alloc_complex(static_cast<std::size_t>(n0) * (n1 / 2 + 1));
    p.fwd = fftw_plan_dft_r2c_2d(n0, n1, r, c, FFTW_ESTIMATE);
    p.bwd = fftw_plan_dft_c2r_2d(n0, n1, c, r, FFTW_ESTIMATE);
    fftw_free(r);
    fftw_free(c);
    return cache.emplace(key, p).first->second;
}

// wavenumber of bin k on an n-point grid (full-spectrum indexing)
int wavenum(int k, int n) { return k <= n / 2 ? k : k - n; }

}  // namespace

void forward_1d(std::span<const double> f, std::vector<std::complex<double>>& c) {
    const int n = static_cast<int>(f.size());
    c.resize(n / 2 + 1);
    std::vector<double> in(f.begin(), f.end());
    fftw_execute_dft_r2c(plans_1d(n).fwd, in.data(),
                         reinterpret_cast<fftw_complex*>(c.data()));
    const double scale = 1.0 / n;
    for (auto& z : c) z *= scale;
}

void backward_1d(std::span<const std::complex<double>> c, std::span<double> f) {
    const int n = static_cast<int>(f.size());
    assert(static_cast<int>(c.size()) == n / 2 + 1);
    std::vector<std::complex<double>> in(c.begin(), c.end());  // c2r clobbers input
    fftw_execute_dft_c2r(plans_1d(n).bwd,
                         reinterpret_cast<fftw_complex*>(in.data()), f.data());
}

std::vector<double> derivative_1d(std::span<const double> f, int order) {
    const int n = static_cast<int>(f.size());
    std::vector<std::complex<double>> c;
    forward_1d(f, c);
    for (int k = 0; k < n / 2 + 1; ++k) {
        std::complex<double> ik(0.0, static_cast<double>(k));
        std::complex<double> m = 1.0;
        for (int p = 0; p < order; ++p) m *= ik;
        c[k] *= m;
    }
    if (order % 2 == 1) c[n / 2] = 0.0;
    std::vector<double> out(n);
    backward_1d(c, out);
    return out;
}

std::vector<double> resample_1d(std::span<const double> f, int m) {
    const int n = static_cast<int>(f.size());
    if (m == n) return {f.begin(), f.end()};
    std::vector<std::complex<double>> c;
    forward_1d(f, c);
    std::vector<std::complex<double>> cm(m / 2 + 1, 0.0);
    const int keep = std::min(n / 2, m / 2);
    for (int k = 0; k < keep; ++k) cm[k] = c[k];
    // Nyquist dropped on both truncation and padding
    std::vector<double> out(m);
    backward_1d(cm, out);
    return out;
}

double l2_norm_1d(std::span<const double> f) {
    const int n = static_cast<int>(f.size());
    std::vector<std::complex<double>> c;
    forward_1d(f, c);
    double s = std::norm(c[0]);
    for (int k = 1; k < n / 2; ++k) s += 2.0 * std::norm(c[k]);
    s += std::norm(c[n / 2]);
    return std::sqrt(2.0 * M_PI * s);
}

double seminorm_1d(std::span<const double> f, int order) {
    const int n = static_cast<int>(f.size());
    std::vector<std::complex<double>> c;
    forward_1d(f, c);
    double s = 0.0;
    for (int k = 1; k <= n / 2; ++k) {
        double w = std::pow(static_cast<double>(k), 2 * order);
        double mult = (k < n / 2) ? 2.0 : 1.0;
        if (order % 2 == 1 && k == n / 2) w = 0.0;
        s += mult * w * std::norm(c[k]);
    }
    return std::sqrt(2.0 * M_PI * s);
}

double sobolev_norm_1d(std::span<const double> f, int s) {
    const int n = static_cast<int>(f.size());
    std::vector<std::complex<double>> c;
    forward_1d(f, c);
    double acc = 0.0;
    for (int k = 0; k <= n / 2; ++k) {
        const double k2 = static_cast<double>(k) * k;
        const double w = std::pow(1.0 + k2, s);
        const double mult = (k == 0 || k == n / 2) ? 1.0 : 2.0;
        acc += mult * w * std::norm(c[k]);
    }
    return std::sqrt(2.0 * M_PI * acc);
}

void forward_2d(const Grid2D& f, std::vector<std::complex<double>>& c) {
    const int n0 = f.nx(), n1 = f.ny();
    c.resize(static_cast<std::size_t>(n0) * (n1 / 2 + 1));
    std::vector<double> in(f.data(), f.data() + f.size());
    fftw_execute_dft_r2c(plans_2d(n0, n1).fwd, in.data(),
                         reinterpret_cast<fftw_complex*>(c.data()));
    const double scale = 1.0 / (static_cast<double>(n0) * n1);
    for (auto& z : c) z *= scale;
}

void backward_2d(std::span<const std::complex<double>> c, Grid2D& f) {
    const int n0 = f.nx(), n1 = f.ny();
    std::vector<std::complex<double>> in(c.begin(), c.end());
    fftw_execute_dft_c2r(plans_2d(n0, n1).bwd,
                         reinterpret_cast<fftw_complex*>(in.data()), f.data());
}

Grid2D derivative_2d(const Grid2D& f, int a, int b) {
    const int n0 = f.nx(), n1 = f.ny();
    std::vector<std::complex<double>> c;
    forward_2d(f, c);
    for (int k0 = 0; k0 < n0; ++k0) {
        const int w0 = wavenum(k0, n0);
        for (int k1 = 0; k1 <= n1 / 2; ++k1) {
            std::complex<double> m = 1.0;
            const std::complex<double> i0(0.0, static_cast<double>(w0));
            const std::complex<double> i1(0.0, static_cast<double>(k1));
            for (int p = 0; p < a; ++p) m *= i0;
            for (int p = 0; p < b; ++p) m *= i1;
            if ((a % 2 == 1 && k0 == n0 / 2) || (b % 2 == 1 && k1 == n1 / 2)) m = 0.0;
            c[static_cast<std::size_t>(k0) * (n1 / 2 + 1) + k1] *= m;
        }
    }
    Grid2D out(n0, n1);
    backward_2d(c, out);
    return out;
}

double l2_norm_2d(const Grid2D& f) {
    std::vector<std::complex<double>> c;
    forward_2d(f, c);
    const int n0 = f.nx(), n1 = f.ny();
    double s = 0.0;
    for (int k0 = 0; k0 < n0; ++k0)
        for (int k1 = 0; k1 <= n1 / 2; ++k1) {
            const double mult = (k1 == 0 || k1 == n1 / 2) ? 1.0 : 2.0;
            s += mult * std::norm(c[static_cast<std::size_t>(k0) * (n1 / 2 + 1) + k1]);
        }
    return std::sqrt(4.0 * M_PI * M_PI * s);
}

double sobolev_norm_2d(const Grid2D& f, int s) {
    std::vector<std::complex<double>> c;
    forward_2d(f, c);
    const int n0 = f.nx(), n1 = f.ny();
    double acc = 0.0;
    for (int k0 = 0; k0 < n0; ++k0) {
        const int w0 = wavenum(k0, n0);
        for (int k1 = 0; k1 <= n1 / 2; ++k1) {
            const double k2 = static_cast<double>(w0) * w0 + static_cast<double>(k1) * k1;
            const double mult = (k1 == 0 || k1 == n1 / 2) ? 1.0 : 2.0;
            acc += mult * std::pow(1.0 + k2, s) *
                   std::norm(c[static_cast<std::size_t>(k0) * (n1 / 2 + 1) + k1]);
        }
    }
    return std::sqrt(4.0 * M_PI * M_PI * acc);
}

}  // namespace polyfsi::sfft
