/// @file polyfsi_main.cpp
/// @brief Batch CLI: run (config to outputs), verify (invariant suites),
///        bench (timed kernels). Exit codes: 0 success, 1 controlled stop,
///        2 error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "polyfsi/bench_kernels.hpp"
#include "polyfsi/config.hpp"
#include "polyfsi/io.hpp"
#include "polyfsi/shell_fft.hpp"

namespace fs = std::filesystem;
using namespace polyfsi;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int seed_flag, const std::vector<std::string>& overrides) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot read config file " << config_path << "\n";
        return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    auto parsed = cfg::parse_config(ss.str());
    for (const auto& w : parsed.warnings)
        std::cerr << "warning: line " << w.line << ": " << w.message << "\n";
    if (!parsed.config) {
        for (const auto& e : parsed.errors)
            std::cerr << "error: line " << e.line << ": " << e.message << "\n";
        return 2;
    }
    cfg::RunConfig rc = *parsed.config;
    {
        std::vector<cfg::ParseIssue> errs;
        for (const auto& o : overrides) cfg::apply_override(rc, o, errs);
        if (seed_flag >= 0) rc.seed = static_cast<unsigned>(seed_flag);
        if (!errs.empty()) {
            for (const auto& e : errs) std::cerr << "error: " << e.message << "\n";
            return 2;
        }
    }

    fs::create_directories(out_dir);
    {
        std::ofstream log(fs::path(out_dir) / "run_log.txt", std::ios::binary);
        for (const auto& w : parsed.warnings)
            log << "warning: line " << w.line << ": " << w.message << "\n";
        log << cfg::render(rc);
    }

    coupling::Trajectory traj;
    try {
        coupling::Driver driver(cfg::make_setup(rc));
        traj = driver.run();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    // ledgers
    io::write_energy_csv((fs::path(out_dir) / "energy.csv").string(), traj.ledgers);
    io::write_fixedpoint_csv((fs::path(out_dir) / "fixedpoint.csv").string(),
                             traj.fp_rows);
    io::write_summary_csv((fs::path(out_dir) / "summary.csv").string(), traj);

    // snapshots and norms at the output cadence
    auto geom = ReferenceGeometry::flat_slab_2d(rc.shell_n, rc.L, rc.ell, rc.kappa0);
    auto lay = mac::Layout::make(rc.fluid_n, rc.fluid_n, mac::BcMode::SlabWalls);
    std::vector<std::pair<double, std::vector<diag::NormRow>>> norm_rows;
    int snap_id = 0;
    for (std::size_t lvl = 0; lvl < traj.times.size(); ++lvl) {
        const bool last = lvl + 1 == traj.times.size();
        if (!(lvl % static_cast<std::size_t>(rc.output_every) == 0 || last)) continue;
        const auto eta_f = sfft::resample_1d(traj.eta[lvl], rc.fluid_n);
        const auto m = mac::Metrics::from_displacement(lay, eta_f, geom.cutoff());
        char name[64];
        std::snprintf(name, sizeof name, "snap_%04d.vtk", snap_id);
        io::write_snapshot((fs::path(out_dir) / name).string(), m, traj.u[lvl],
                           traj.p[lvl], traj.stress[lvl], traj.times[lvl]);
        std::snprintf(name, sizeof name, "shell_%04d.csv", snap_id);
        io::write_shell_csv((fs::path(out_dir) / name).string(), traj.eta[lvl],
                            traj.eta_t[lvl]);
        norm_rows.emplace_back(traj.times[lvl],
                               diag::norm_suite(m, traj.u[lvl], traj.p[lvl],
                                                traj.eta[lvl], traj.eta_t[lvl]));
        ++snap_id;
    }
    io::write_norms_csv((fs::path(out_dir) / "norms.csv").string(), norm_rows);

    std::cout << "stop_reason=" << traj.stop_reason;
    if (!traj.stop_detail.empty()) std::cout << " (" << traj.stop_detail << ")";
    std::cout << "\nsteps=" << (traj.times.empty() ? 0 : traj.times.size() - 1)
              << " windows=" << traj.window_starts.size()
              << " smallness=" << io::g17(traj.smallness.value)
              << (traj.smallness.ok ? " (ok)" : " (exceeded)") << "\n";
    if (traj.stop_reason == "completed") return 0;
    if (traj.stop_reason == "subsolver_failure" || traj.stop_reason == "io_error")
        return 2;
    return 1;  // controlled stop: degeneracy or non-contraction
}

int check(bool ok, const std::string& name, const std::string& detail,
          int& failures) {
    std::cout << (ok ? "PASS " : "FAIL ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
    return ok ? 0 : 1;
}

int cmd_verify() {
    int failures = 0;
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);

    {  // vectorization identity
        double worst = 0;
        for (int d : {2, 3})
            for (int rep = 0; rep < 200; ++rep) {
                oldroyd::Mat l(d, d), t(d, d);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        l(i, j) = dist(rng);
                        t(i, j) = dist(rng);
                    }
                t = oldroyd::Mat(0.5 * (t + t.transpose()));
                const oldroyd::BigVec lhs = oldroyd::assemble_W(l) * oldroyd::vec(t);
                const oldroyd::BigVec rhs = oldroyd::vec(l * t + t * l.transpose());
                worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
            }
        check(worst <= 1e-13, "tensor_vectorization_identity", io::g17(worst),
              failures);
    }
    {  // tube roundtrip and the naive-inverse gap
        auto slab = ReferenceGeometry::flat_slab_2d(64);
        ShellField eta = slab.zero_shell_field();
        for (int i = 0; i < 64; ++i)
            eta.at(i) = 0.1 * std::cos(slab.shell_coord(i)) +
                        0.03 * std::sin(3 * slab.shell_coord(i));
        HanzawaMap map(slab, eta);
        double worst = 0;
        std::uniform_real_distribution<double> ux(0.0, 2.0 * M_PI);
        std::uniform_real_distribution<double> uz(0.1, 1.0 + 0.9 * slab.ell());
        for (int k = 0; k < 500; ++k) {
            const Vec x(ux(rng), uz(rng));
            const Vec rt = map.inverse(map.forward(x));
            worst = std::max(worst, (rt - x).norm_inf());
        }
        check(worst <= 1e-10, "tube_transform_roundtrip", io::g17(worst), failures);
        std::cout << "INFO naive_sign_flip_inverse_gap "
                  << io::g17(map.naive_inverse_defect()) << "\n";
    }
    {  // divergence-free lift
        auto slab = ReferenceGeometry::flat_slab_2d(64);
        ShellField eta = slab.zero_shell_field(), xi = slab.zero_shell_field();
        for (int i = 0; i < 64; ++i) {
            eta.at(i) = 0.06 * std::cos(slab.shell_coord(i));
            xi.at(i) = std::cos(2 * slab.shell_coord(i));
        }
        auto ef = ext::solenoidal_extension(slab, eta, xi, 64, 64);
        const double div = mac::max_divergence(ef.metrics, ef.phi);
        check(div <= 1e-12, "extension_divergence_free", io::g17(div), failures);
    }
    {  // zero-data coupled step is exactly zero
        auto geom = ReferenceGeometry::flat_slab_2d(32);
        ss::Stepper stepper(geom, 32, 32);
        std::vector<double> z(32, 0.0);
        auto s = stepper.make_state(z, z, nullptr);
        auto led = stepper.advance(s, 0.01, {});
        check(led.residual == 0.0 && led.subiters == 1, "zero_data_fixed_point", "",
              failures);
    }
    {  // determinism of a miniature coupled run
        auto make = []() {
            coupling::RunSetup s;
            s.geom = std::make_shared<ReferenceGeometry>(
                ReferenceGeometry::flat_slab_2d(32));
            s.nx = 32;
            s.nz = 32;
            s.dt = 1.0 / 64.0;
            s.t_star = 4.0 / 64.0;
            s.t_end = 8.0 / 64.0;
            s.min_window_steps = 4;
            s.eta0.assign(32, 0.0);
            s.eta_star.assign(32, 0.0);
            s.feeds.shell_force = [](double) {
                std::vector<double> g(32);
                for (int i = 0; i < 32; ++i) g[i] = 0.01 * std::cos(2.0 * M_PI * i / 32);
                return g;
            };
            return s;
        };
        coupling::Driver d1(make()), d2(make());
        auto t1 = d1.run();
        auto t2 = d2.run();
        bool same = t1.stop_reason == t2.stop_reason && t1.times == t2.times;
        for (std::size_t k = 0; same && k < t1.eta.size(); ++k)
            same = t1.eta[k] == t2.eta[k];
        for (std::size_t k = 0; same && k < t1.ledgers.size(); ++k)
            same = t1.ledgers[k].residual == t2.ledgers[k].residual;
        check(same, "coupled_run_determinism", "", failures);
    }
    {  // serial/parallel agreement of the transport kernel
        auto results = bench::run_kernels(7, 12, 1);
        bool all = true;
        for (const auto& r : results) all = all && r.bitwise_equal;
        check(all, "parallel_kernels_bitwise", "", failures);
    }
    std::cout << (failures == 0 ? "verify: all checks passed\n"
                                : "verify: FAILURES present\n");
    return failures == 0 ? 0 : 2;
}

int cmd_bench(unsigned seed, int n, int repeats) {
    auto results = bench::run_kernels(seed, n, repeats);
    std::printf("%-28s %12s %12s %9s %8s\n", "kernel", "serial[ms]", "openmp[ms]",
                "speedup", "bitwise");
    for (const auto& r : results)
        std::printf("%-28s %12.3f %12.3f %9.2f %8s\n", r.name.c_str(), r.serial_ms,
                    r.parallel_ms, r.speedup, r.bitwise_equal ? "yes" : "NO");
    for (const auto& r : results)
        if (!r.bitwise_equal) return 2;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slab FSI with transported extra stress"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    int seed = -1;
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "run a configured simulation");
    run->add_option("--config", config_path, "INI config path")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "override the run seed");
    run->add_option("--override", overrides, "section.key=value (repeatable)");

    auto* verify = app.add_subcommand("verify", "run the invariant suites");

    unsigned bseed = 1;
    int bn = 24, brep = 3;
    auto* bench_cmd = app.add_subcommand("bench", "time the parallel kernels");
    bench_cmd->add_option("--seed", bseed, "rng seed");
    bench_cmd->add_option("--n", bn, "problem size per axis");
    bench_cmd->add_option("--repeats", brep, "timing repeats");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, seed, overrides);
        if (verify->parsed()) return cmd_verify();
        if (bench_cmd->parsed()) return cmd_bench(bseed, bn, brep);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
