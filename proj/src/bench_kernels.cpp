#include "polyfsi/bench_kernels.hpp"

#include <chrono>
#include <random>

#include "polyfsi/core.hpp"
#include "polyfsi/solute.hpp"

namespace polyfsi::bench {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

solute::AnalyticVelocity swirl() {
    using oldroyd::Mat;
    return solute::AnalyticVelocity(
        2,
        [](double t, const Vec& x) {
            return Vec(-x[1] + 0.1 * std::sin(t) * x[0] * x[0], x[0]);
        },
        [](double t, const Vec& x) {
            Mat l(2, 2);
            l << 0.2 * std::sin(t) * x[0], -1.0, 1.0, 0.0;
            return l;
        });
}

}  // namespace

std::vector<KernelResult> run_kernels(unsigned seed, int n, int repeats) {
    std::vector<KernelResult> out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);

    // stress transport field solve (backward trace + stress integration)
    {
        auto v = swirl();
        solute::SoluteGrid grid;
        grid.nx = n;
        grid.ny = n;
        grid.position = [n](double, int i, int j) {
            return Vec(-0.4 + 0.8 * (i + 0.5) / n, -0.4 + 0.8 * (j + 0.5) / n);
        };
        solute::StressInitFn t0 = [](const Vec& x) {
            oldroyd::Mat t(2, 2);
            t << 0.1 * x[0], 0.05, 0.05, -0.1 * x[1];
            return oldroyd::vec(t);
        };
        const double times[] = {0.5};
        KernelResult r;
        r.name = "stress_transport_field";
        solute::SoluteFieldResult a, b;
        {
            auto t0c = Clock::now();
            for (int k = 0; k < repeats; ++k)
                b = solute::solve_solute_field(v, grid, t0, 0.0, times, 1e-2, {}, false);
            r.serial_ms = ms_since(t0c) / repeats;
        }
        {
            auto t0c = Clock::now();
            for (int k = 0; k < repeats; ++k)
                a = solute::solve_solute_field(v, grid, t0, 0.0, times, 1e-2, {}, true);
            r.parallel_ms = ms_since(t0c) / repeats;
        }
        r.bitwise_equal = true;
        for (std::size_t c = 0; c < a.series[0].comp.size(); ++c)
            for (std::size_t q = 0; q < a.series[0].comp[c].size(); ++q)
                if (a.series[0].comp[c].data()[q] != b.series[0].comp[c].data()[q])
                    r.bitwise_equal = false;
        r.speedup = r.serial_ms / r.parallel_ms;
        out.push_back(r);
    }

    // characteristic bundle tracing
    {
        auto v = swirl();
        std::vector<Vec> seeds;
        for (int k = 0; k < n * n / 2; ++k)
            seeds.emplace_back(0.5 * dist(rng), 0.5 * dist(rng));
        KernelResult r;
        r.name = "characteristic_bundle";
        solute::CharacteristicBundle a, b;
        {
            auto t0c = Clock::now();
            for (int k = 0; k < repeats; ++k)
                b = solute::trace_characteristics(v, seeds, 0.0, 1.0, 1e-2, {}, false);
            r.serial_ms = ms_since(t0c) / repeats;
        }
        {
            auto t0c = Clock::now();
            for (int k = 0; k < repeats; ++k)
                a = solute::trace_characteristics(v, seeds, 0.0, 1.0, 1e-2, {}, true);
            r.parallel_ms = ms_since(t0c) / repeats;
        }
        r.bitwise_equal = true;
        for (std::size_t s = 0; s < seeds.size(); ++s)
            for (std::size_t q = 0; q < a.paths[s].x.size(); ++q)
                if (a.paths[s].x[q][0] != b.paths[s].x[q][0] ||
                    a.paths[s].x[q][1] != b.paths[s].x[q][1])
                    r.bitwise_equal = false;
        r.speedup = r.serial_ms / r.parallel_ms;
        out.push_back(r);
    }

    // deterministic reductions
    {
        const std::int64_t len = static_cast<std::int64_t>(n) * n * 64;
        std::vector<double> x(static_cast<std::size_t>(len)), y(x.size());
        for (auto& v : x) v = dist(rng);
        for (auto& v : y) v = dist(rng);
        KernelResult r;
        r.name = "deterministic_dot";
        double a = 0, b = 0;
        {
            auto t0c = Clock::now();
            for (int k = 0; k < repeats * 8; ++k) b = par::det_dot_serial(x, y);
            r.serial_ms = ms_since(t0c) / (repeats * 8);
        }
        {
            auto t0c = Clock::now();
            for (int k = 0; k < repeats * 8; ++k) a = par::det_dot(x, y);
            r.parallel_ms = ms_since(t0c) / (repeats * 8);
        }
        r.bitwise_equal = (a == b);
        r.speedup = r.serial_ms / r.parallel_ms;
        out.push_back(r);
    }
    return out;
}

}  // namespace polyfsi::bench
