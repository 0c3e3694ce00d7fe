#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "polyfsi/config.hpp"
#include "polyfsi/io.hpp"
#include "polyfsi/shell_fft.hpp"

using namespace polyfsi;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path tmpdir() {
    auto p = fs::temp_directory_path() / "polyfsi_io_test";
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("minimal config keeps the documented defaults") {
    auto res = cfg::parse_config("[time]\nT = 0.25\n");
    REQUIRE(res.config.has_value());
    CHECK(res.errors.empty());
    const auto& c = *res.config;
    CHECK(c.T == 0.25);
    CHECK(c.dim == 2);
    CHECK(c.fluid_n == 64);
    CHECK(c.shell_n == 128);
    CHECK(c.L == 0.5);
    CHECK(c.ell == 0.15);
    CHECK(c.tol_fp == 1e-8);
    CHECK(c.eta0.name == "zero");
    CHECK(c.load_transfer == "variational");
}

TEST_CASE("all validation errors are reported with their lines") {
    const std::string text =
        "[geometry]\n"   // 1
        "L = 0.5\n"      // 2
        "ell = 0.6\n"    // 3
        "[grid]\n"       // 4
        "fluid_n = 48\n" // 5
        "[data]\n"       // 6
        "g = wobble(1)\n";
    auto res = cfg::parse_config(text);
    CHECK_FALSE(res.config.has_value());
    REQUIRE(res.errors.size() >= 3);
    bool saw_ell = false, saw_pow2 = false, saw_preset = false;
    for (const auto& e : res.errors) {
        if (e.message.find("ell") != std::string::npos) {
            saw_ell = true;
            CHECK(e.line == 3);
        }
        if (e.message.find("power of two") != std::string::npos) {
            saw_pow2 = true;
            CHECK(e.line == 5);
        }
        if (e.message.find("unknown preset") != std::string::npos) {
            saw_preset = true;
            CHECK(e.line == 7);
        }
    }
    CHECK(saw_ell);
    CHECK(saw_pow2);
    CHECK(saw_preset);
}

TEST_CASE("duplicate keys warn and the last value wins") {
    auto res = cfg::parse_config("[time]\nT = 0.25\nT = 0.5\n");
    REQUIRE(res.config.has_value());
    CHECK(res.config->T == 0.5);
    REQUIRE(res.warnings.size() == 1);
    CHECK(res.warnings[0].line == 3);
    CHECK(res.warnings[0].message.find("last value wins") != std::string::npos);
}

TEST_CASE("unknown keys are rejected in strict mode") {
    auto res = cfg::parse_config("[time]\nstep_count = 5\n");
    CHECK_FALSE(res.config.has_value());
    REQUIRE(res.errors.size() == 1);
    CHECK(res.errors[0].line == 2);
    auto lax = cfg::parse_config("[time]\nstep_count = 5\n", false);
    CHECK(lax.config.has_value());
}

TEST_CASE("overrides reuse the parser and the duplicate policy") {
    auto res = cfg::parse_config("[time]\nT = 0.25\n");
    REQUIRE(res.config.has_value());
    cfg::RunConfig c = *res.config;
    std::vector<cfg::ParseIssue> errs;
    cfg::apply_override(c, "time.dt=0.001", errs);
    cfg::apply_override(c, "data.g=fourier_mode(2, 0.01)", errs);
    CHECK(errs.empty());
    CHECK(c.dt == 0.001);
    CHECK(c.g.name == "fourier_mode");
    REQUIRE(c.g.args.size() == 2);
    CHECK(c.g.args[1] == 0.01);
    cfg::apply_override(c, "grid.fluid_n=100", errs);
    CHECK_FALSE(errs.empty());
}

TEST_CASE("preset registry rejects field-inappropriate uses") {
    CHECK(cfg::preset_known("taylor_green"));
    CHECK_FALSE(cfg::preset_known("vortex"));
    cfg::Preset tg;
    tg.name = "taylor_green";
    CHECK_THROWS_AS(cfg::shell_preset(tg, 32), ConfigError);
    cfg::Preset fm;
    fm.name = "fourier_mode";
    fm.args = {2.0, 0.5};
    auto vals = cfg::shell_preset(fm, 64);
    CHECK(vals[0] == doctest::Approx(0.5));
}

TEST_CASE("snapshot writer round-trips bitwise through the bundled reader") {
    auto lay = mac::Layout::make(16, 16, mac::BcMode::SlabWalls);
    std::vector<double> eta(16);
    for (int i = 0; i < 16; ++i) eta[i] = 0.05 * std::cos(lay.xi_node(i));
    auto m = mac::Metrics::from_displacement(lay, eta, CutoffProfile(0.5));
    mac::FaceField u = mac::FaceField::zeros(lay);
    Grid2D p(16, 16);
    auto t = solute::StressField::zeros(2, 16, 16);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (std::size_t k = 0; k < u.u1.size(); ++k) u.u1.data()[k] = dist(rng);
    for (std::size_t k = 0; k < u.u2.size(); ++k) u.u2.data()[k] = dist(rng);
    for (std::size_t k = 0; k < p.size(); ++k) p.data()[k] = dist(rng);
    for (auto& c : t.comp)
        for (std::size_t k = 0; k < c.size(); ++k) c.data()[k] = 0.1 * dist(rng);

    const auto path = (tmpdir() / "snap_test.vtk").string();
    io::write_snapshot(path, m, u, p, t, 0.375);
    auto snap = io::read_snapshot(path);
    CHECK(snap.nx == 16);
    CHECK(snap.nz == 16);
    CHECK(snap.time == 0.375);

    Grid2D c1, c2;
    mac::face_to_center(m, u, mac::WallTraces::zeros(16), c1, c2);
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i) {
            const std::size_t k = static_cast<std::size_t>(j * 16 + i);
            CHECK(snap.u1[k] == c1(i, j));  // bitwise through %.17g
            CHECK(snap.p[k] == p(i, j));
            CHECK(snap.stress[1][k] == t.comp[1](i, j));
        }
}

TEST_CASE("zero-step ledgers give header-only csv files") {
    const auto dir = tmpdir();
    io::write_energy_csv((dir / "energy_empty.csv").string(), {});
    const std::string text = slurp(dir / "energy_empty.csv");
    CHECK(text.substr(0, 2) == "t,");
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
}

TEST_CASE("identical miniature runs produce byte-identical outputs") {
    auto run_once = [&](const fs::path& dir) {
        coupling::RunSetup s;
        s.geom =
            std::make_shared<ReferenceGeometry>(ReferenceGeometry::flat_slab_2d(32));
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
        coupling::Driver driver(std::move(s));
        auto traj = driver.run();
        REQUIRE(traj.stop_reason == "completed");
        fs::create_directories(dir);
        io::write_energy_csv((dir / "energy.csv").string(), traj.ledgers);
        io::write_fixedpoint_csv((dir / "fixedpoint.csv").string(), traj.fp_rows);
        auto lay = mac::Layout::make(32, 32, mac::BcMode::SlabWalls);
        auto geom = ReferenceGeometry::flat_slab_2d(32);
        const auto eta_f = sfft::resample_1d(traj.eta.back(), 32);
        auto m = mac::Metrics::from_displacement(lay, eta_f, geom.cutoff());
        io::write_snapshot((dir / "snap.vtk").string(), m, traj.u.back(),
                           traj.p.back(), traj.stress.back(), traj.times.back());
    };
    const auto base = tmpdir();
    run_once(base / "a");
    run_once(base / "b");
    CHECK(slurp(base / "a" / "energy.csv") == slurp(base / "b" / "energy.csv"));
    CHECK(slurp(base / "a" / "fixedpoint.csv") == slurp(base / "b" / "fixedpoint.csv"));
    CHECK(slurp(base / "a" / "snap.vtk") == slurp(base / "b" / "snap.vtk"));
}
