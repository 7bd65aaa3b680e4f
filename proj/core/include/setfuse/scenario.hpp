#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "setfuse/core_model.hpp"
#include "setfuse/solvers.hpp"

namespace setfuse {

/// Inclusive range sampled at `steps` evenly spaced points.
struct RangeSpec {
    double min = 0.0;
    double max = 1.0;
    std::size_t steps = 1;

    std::vector<double> values() const;
};

/// Parameter sweep over a diversity (kappa) or scale-factor (z) axis and
/// the mixture weight. With a kappa axis, input k receives the covariance
/// R(phi[k]) diag(s1, s2) R(phi[k])^T where s1 / s2 = kappa and either
/// s1 s2 = det_sigma (when given) or s1 = major_variance.
struct SweepSpec {
    std::optional<RangeSpec> kappa;
    std::optional<RangeSpec> z;
    RangeSpec omega{0.0, 1.0, 101};
    std::optional<double> det_sigma;
    double major_variance = 1.0;
    std::array<double, 2> phi{0.7853981633974483, -0.7853981633974483};

    /// Input covariance for the given kappa and input index (0 or 1).
    Matrix covariance(double kappa, std::size_t input) const;
};

struct Scenario {
    Scenario(FiniteSetDistribution f_i, FiniteSetDistribution f_j) : inputs{std::move(f_i), std::move(f_j)} {}

    std::array<FiniteSetDistribution, 2> inputs;
    /// Mixture weight used by the fixed-weight (p2) mode.
    double omega = 0.5;
    std::optional<SweepSpec> sweep;
    NewtonConfig solver;
    std::filesystem::path outputs = ".";

    std::string_view family() const { return family_name(inputs[0]); }
};

/// Parses a version-1 scenario document. Unknown fields are rejected.
/// Relative grid file paths resolve against base_dir. Throws InputError.
Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

/// Replaces the localisation density of f, keeping its cardinality model.
FiniteSetDistribution with_localisation(const FiniteSetDistribution& f, LocalisationDensity loc);

/// Header plus numeric rows; cells may be empty strings.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const;
    void write(const std::filesystem::path& path) const;
};

/// Shortest round-trip-safe form: 17 significant digits, '.' decimal.
std::string format_number(double value);

enum class FuseMode { p2, consistent };

FuseMode parse_fuse_mode(std::string_view name);
std::string_view fuse_mode_name(FuseMode mode);

/// Fixed-weight fusion at scenario.omega (p2) or the cardinality-consistent
/// fusion with Newton / closed-form weights (consistent).
FusionResult fuse_scenario(const Scenario& scenario, FuseMode mode);

/// One-row table: family, mode, weights, scale factor, fused parameters and
/// diagnostic flags.
CsvTable fuse_table(const Scenario& scenario, FuseMode mode, const FusionResult& result);

/// Fixed-weight fusion over every (axis, omega) cell of the sweep. Rows are
/// in (axis, omega) order regardless of `jobs`. Columns: the axis name
/// (kappa or z), omega, z_omega, then alpha_omega / lambda_omega /
/// (map_n, min_ratio) by family, then inconsistent_flag.
CsvTable sweep_scenario(const Scenario& scenario, std::size_t jobs = 1);

/// Loads the scenario, applies an optional seed override, writes fuse.csv
/// into out_dir and returns the result.
FusionResult run_fuse(const std::filesystem::path& scenario_path, FuseMode mode, const std::filesystem::path& out_dir,
                      std::optional<std::uint64_t> seed = std::nullopt);

/// Loads the scenario (which must contain a sweep), writes sweep.csv into
/// out_dir and returns the table.
CsvTable run_sweep(const std::filesystem::path& scenario_path, const std::filesystem::path& out_dir,
                   std::optional<std::uint64_t> seed = std::nullopt, std::size_t jobs = 1);

}  // namespace setfuse
