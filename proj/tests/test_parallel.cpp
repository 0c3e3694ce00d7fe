#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <random>

#include "polyfsi/bench_kernels.hpp"
#include "polyfsi/core.hpp"
#include "polyfsi/solute.hpp"

using namespace polyfsi;

TEST_CASE("deterministic reductions are thread-count independent") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(100000), y(x.size());
    for (auto& v : x) v = dist(rng);
    for (auto& v : y) v = dist(rng);

    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const double s1 = par::det_sum(x);
    const double d1 = par::det_dot(x, y);
    omp_set_num_threads(2);
    const double s2 = par::det_sum(x);
    const double d2 = par::det_dot(x, y);
    omp_set_num_threads(saved);
    CHECK(s1 == s2);
    CHECK(d1 == d2);
    CHECK(s1 == par::det_sum_serial(x));
    CHECK(d1 == par::det_dot_serial(x, y));
}

TEST_CASE("transport kernels match their serial reference bitwise") {
    auto results = bench::run_kernels(5, 12, 1);
    REQUIRE(results.size() >= 3);
    for (const auto& r : results) {
        INFO(r.name);
        CHECK(r.bitwise_equal);
    }
}

TEST_CASE("field solve is identical under different thread counts") {
    solute::AnalyticVelocity v(
        2, [](double, const Vec& x) { return Vec(-x[1], x[0]); },
        [](double, const Vec&) {
            oldroyd::Mat l(2, 2);
            l << 0, -1, 1, 0;
            return l;
        });
    solute::SoluteGrid grid;
    grid.nx = 10;
    grid.ny = 10;
    grid.position = [](double, int i, int j) {
        return Vec(-0.3 + 0.06 * i, -0.3 + 0.06 * j);
    };
    solute::StressInitFn t0 = [](const Vec& x) {
        oldroyd::Mat t(2, 2);
        t << 0.2 * x[0], 0.1, 0.1, -0.2 * x[1];
        return oldroyd::vec(t);
    };
    const double times[] = {0.7};

    const int saved = omp_get_max_threads();
    omp_set_num_threads(2);
    auto a = solute::solve_solute_field(v, grid, t0, 0.0, times, 1e-2);
    omp_set_num_threads(1);
    auto b = solute::solve_solute_field(v, grid, t0, 0.0, times, 1e-2);
    omp_set_num_threads(saved);
    for (std::size_t c = 0; c < a.series[0].comp.size(); ++c)
        for (std::size_t k = 0; k < a.series[0].comp[c].size(); ++k)
            CHECK(a.series[0].comp[c].data()[k] == b.series[0].comp[c].data()[k]);
    CHECK(a.max_symmetry_defect == b.max_symmetry_defect);
}
