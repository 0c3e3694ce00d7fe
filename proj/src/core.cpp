#include "polyfsi/core.hpp"

#include <omp.h>

namespace polyfsi::par {

int max_threads() { return omp_get_max_threads(); }

namespace {

std::int64_t n_blocks(std::int64_t n) { return (n + kBlock - 1) / kBlock; }

}  // namespace

double det_sum(std::span<const double> x) {
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    const std::int64_t nb = n_blocks(n);
    if (nb <= 1) return pairwise_block(x.data(), n);
    std::vector<double> partial(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < nb; ++b) {
        const std::int64_t lo = b * kBlock;
        partial[static_cast<std::size_t>(b)] =
            pairwise_block(x.data() + lo, std::min(kBlock, n - lo));
    }
    double s = 0;
    for (double p : partial) s += p;
    return s;
}

double det_sum_serial(std::span<const double> x) {
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    const std::int64_t nb = n_blocks(n);
    if (nb <= 1) return pairwise_block(x.data(), n);
    double s = 0;
    for (std::int64_t b = 0; b < nb; ++b) {
        const std::int64_t lo = b * kBlock;
        s += pairwise_block(x.data() + lo, std::min(kBlock, n - lo));
    }
    return s;
}

namespace {

double dot_block(const double* a, const double* b, std::int64_t n) {
    // products staged into a fixed buffer so the summation order matches
    // pairwise_block exactly
    double buf[kBlock];
    for (std::int64_t i = 0; i < n; ++i) buf[i] = a[i] * b[i];
    return pairwise_block(buf, n);
}

}  // namespace

double det_dot(std::span<const double> a, std::span<const double> b) {
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    const std::int64_t nb = n_blocks(n);
    if (nb <= 1) return dot_block(a.data(), b.data(), n);
    std::vector<double> partial(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(static)
    for (std::int64_t blk = 0; blk < nb; ++blk) {
        const std::int64_t lo = blk * kBlock;
        partial[static_cast<std::size_t>(blk)] =
            dot_block(a.data() + lo, b.data() + lo, std::min(kBlock, n - lo));
    }
    double s = 0;
    for (double p : partial) s += p;
    return s;
}

double det_dot_serial(std::span<const double> a, std::span<const double> b) {
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    const std::int64_t nb = n_blocks(n);
    if (nb <= 1) return dot_block(a.data(), b.data(), n);
    double s = 0;
    for (std::int64_t blk = 0; blk < nb; ++blk) {
        const std::int64_t lo = blk * kBlock;
        s += dot_block(a.data() + lo, b.data() + lo, std::min(kBlock, n - lo));
    }
    return s;
}

double det_max_abs(std::span<const double> x) {
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    double m = 0;
#pragma omp parallel for schedule(static) reduction(max : m)
    for (std::int64_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

}  // namespace polyfsi::par
