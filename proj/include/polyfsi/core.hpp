/// @file core.hpp
/// @brief Shared basics: small vectors, 2d arrays, errors, deterministic
///        parallel primitives.
///
/// Every floating-point reduction in this project goes through the helpers
/// in polyfsi::par so that results are bitwise independent of the thread
/// count: arrays are cut into fixed-size blocks, each block is summed with
/// a fixed pairwise scheme, and block results are combined in index order.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyfsi {

// ---------------------------------------------------------------------------
// errors
// ---------------------------------------------------------------------------

/// Geometry left the admissible regime (displacement bound or area floor).
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An iterative solve did not reach its tolerance within budget.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A characteristic sample left the moving domain beyond tolerance.
struct DomainExitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// small vectors (d = 2 or 3, runtime dimension, fixed storage)
// ---------------------------------------------------------------------------

struct Vec {
    std::array<double, 3> v{0.0, 0.0, 0.0};
    int d = 2;

    Vec() = default;
    Vec(double x, double y) : v{x, y, 0.0}, d(2) {}
    Vec(double x, double y, double z) : v{x, y, z}, d(3) {}
    static Vec zero(int dim) {
        Vec r;
        r.d = dim;
        return r;
    }

    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < d; ++i) v[i] += o.v[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < d; ++i) v[i] -= o.v[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < d; ++i) v[i] *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator*(Vec a, double s) { return a *= s; }

    double dot(const Vec& o) const {
        double s = 0;
        for (int i = 0; i < d; ++i) s += v[i] * o.v[i];
        return s;
    }
    double norm() const { return std::sqrt(dot(*this)); }
    double norm_inf() const {
        double m = 0;
        for (int i = 0; i < d; ++i) m = std::max(m, std::abs(v[i]));
        return m;
    }
};

// ---------------------------------------------------------------------------
// dense row-major 2d array
// ---------------------------------------------------------------------------

template <class T>
class Array2D {
  public:
    Array2D() = default;
    Array2D(int nx, int ny, T init = T{})
        : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx) * ny, init) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return data_.size(); }

    T& operator()(int i, int j) { return data_[idx(i, j)]; }
    const T& operator()(int i, int j) const { return data_[idx(i, j)]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::span<const T> span() const { return {data_.data(), data_.size()}; }
    std::span<T> span() { return {data_.data(), data_.size()}; }

    void fill(T v) { data_.assign(data_.size(), v); }

    bool same_shape(const Array2D& o) const { return nx_ == o.nx_ && ny_ == o.ny_; }

  private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * ny_ + j;
    }
    int nx_ = 0, ny_ = 0;
    std::vector<T> data_;
};

using Grid2D = Array2D<double>;

// ---------------------------------------------------------------------------
// deterministic parallel primitives
// ---------------------------------------------------------------------------

namespace par {

/// Fixed block length for deterministic reductions. Must not depend on the
/// thread count.
inline constexpr std::int64_t kBlock = 4096;

int max_threads();

/// Static blocked parallel loop; f(i) must only touch index-i state.
template <class F>
void parallel_for(std::int64_t n, F&& f) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) f(i);
}

/// Pairwise sum of one block (serial, order fixed).
inline double pairwise_block(const double* x, std::int64_t n) {
    if (n <= 8) {
        double s = 0;
        for (std::int64_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::int64_t h = n / 2;
    return pairwise_block(x, h) + pairwise_block(x + h, n - h);
}

/// Deterministic sum: fixed blocks summed pairwise, block results combined
/// in index order. Identical bits for any thread count.
double det_sum(std::span<const double> x);
/// Serial reference for det_sum.
double det_sum_serial(std::span<const double> x);

double det_dot(std::span<const double> a, std::span<const double> b);
double det_dot_serial(std::span<const double> a, std::span<const double> b);

double det_max_abs(std::span<const double> x);

}  // namespace par

// ---------------------------------------------------------------------------
// misc
// ---------------------------------------------------------------------------

inline bool approx_eq(double a, double b, double tol) { return std::abs(a - b) <= tol; }

/// Observed convergence order from errors at resolution ratio 2.
inline double observed_order(double err_coarse, double err_fine) {
    return std::log2(err_coarse / err_fine);
}

}  // namespace polyfsi
