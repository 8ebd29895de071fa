#pragma once

#include "hrvem/analysis.hpp"
#include "hrvem/mesh.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hrvem {

struct StudyExpectations {
    std::optional<double> rate_min;        // minimum fitted slope for non-exact norms
    std::vector<std::string> exact_norms;  // norms required to sit at machine precision
};

struct StudyConfig {
    char test = 'a';
    std::vector<MeshFamily> families;
    int k = 1;
    std::vector<int> levels;
    std::uint64_t rng_seed = 0;
    std::string out_dir = "out";
    double solver_tol = 1e-10;
    double exact_threshold = 1e-10;  // "exact" when err <= threshold * (1 + |exact norm|)
    bool record_timing = false;      // wall time breaks byte-identical reruns; off by default
    bool dump_matrix = false;
    StudyExpectations expect;
};

/// Flat key = value text with bracketed arrays; '#' starts a comment.
/// Throws std::invalid_argument on unknown keys or malformed values.
StudyConfig parse_config(const std::string& text);
StudyConfig load_config(const std::string& path);

struct LevelResult {
    int n = 0;
    double h_bar_e = 0.0;
    double e_sigma = 0.0, e_sigma_div = 0.0, e_u = 0.0;
    double norm_sigma = 0.0, norm_sigma_div = 0.0, norm_u = 0.0;  // exact-field magnitudes
    long n_dofs = 0;
    double seconds = 0.0;
    bool failed = false;
    std::string error;
};

struct FamilyResult {
    MeshFamily family = MeshFamily::QuadS;
    std::vector<LevelResult> levels;
    RateFit rate_sigma, rate_sigma_div, rate_u;
    double family_seconds = 0.0;
};

struct StudyResult {
    StudyConfig config;
    std::vector<FamilyResult> families;
    bool expectations_ok = true;
    std::vector<std::string> failures;
};

/// One (test, family, n, k) solve with the three error norms.
LevelResult run_case(char test, MeshFamily family, int n, int k, std::uint64_t seed,
                     double solver_tol, bool record_timing = false);

/// Runs the full matrix, writes one CSV per family, a Markdown summary and
/// one SVG log-log plot per error norm into config.out_dir. Deterministic
/// for a fixed config unless record_timing is on.
StudyResult run_study(const StudyConfig& config);

std::string csv_path(const StudyConfig& config, MeshFamily family);
std::string summary_path(const StudyConfig& config);
std::string plot_path(const StudyConfig& config, const std::string& norm);

} // namespace hrvem
