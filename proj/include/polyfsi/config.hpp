/// @file config.hpp
/// @brief Run configuration: INI-style parsing with full error reporting,
///        the analytic data-preset registry, and assembly of a run setup.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyfsi/coupling.hpp"

namespace polyfsi::cfg {

/// Parsed "name" or "name(a, b, ...)" preset reference.
struct Preset {
    std::string name = "zero";
    std::vector<double> args;
};

struct RunConfig {
    // geometry
    int dim = 2;
    std::string geometry = "flat_slab";
    double L = 0.5, ell = 0.15, kappa0 = 0.5;
    // grids (powers of two)
    int fluid_n = 64;
    int shell_n = 128;
    // time
    double T = 0.5, t_star = 0.125, dt = 1.0 / 256.0;
    // data presets
    Preset eta0, eta_star, u0, t0, f, g;
    // solver
    double tol_fsi = 1e-8, tol_fp = 1e-8, tol_lin = 1e-11;
    int max_fp = 10;
    double relax = 0.5;
    bool aitken = true;
    std::string load_transfer = "variational";
    int min_window_steps = 16;
    // smallness constants
    double smallness_c = 1.0, smallness_eps = 0.1;
    // output
    int output_every = 8;
    unsigned seed = 0;
};

struct ParseIssue {
    int line = 0;
    std::string message;
};

struct ParseResult {
    std::optional<RunConfig> config;  // set only when errors is empty
    std::vector<ParseIssue> errors;
    std::vector<ParseIssue> warnings;  // e.g. duplicate keys (last wins)
};

/// Parse the documented INI dialect. strict rejects unknown keys.
ParseResult parse_config(const std::string& text, bool strict = true);

/// Apply one "section.key=value" override; errors are appended (line 0).
void apply_override(RunConfig& cfg, const std::string& entry,
                    std::vector<ParseIssue>& errors);

/// Re-validate a config after overrides.
std::vector<ParseIssue> validate(const RunConfig& cfg);

/// Validation issues keyed by the config entry that caused them.
std::vector<std::pair<std::string, std::string>> validate_keyed(const RunConfig& cfg);

/// Known preset names.
bool preset_known(const std::string& name);

/// Shell scalar preset sampled on n nodes over [0, 2pi).
std::vector<double> shell_preset(const Preset& p, int n);

/// Build the coupled run setup (throws ConfigError on dim != 2).
coupling::RunSetup make_setup(const RunConfig& cfg);

/// Render the effective configuration back as INI text (for run logs).
std::string render(const RunConfig& cfg);

}  // namespace polyfsi::cfg
