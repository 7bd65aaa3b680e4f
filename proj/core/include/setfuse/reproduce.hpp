#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "setfuse/scenario.hpp"
#include "setfuse/solvers.hpp"

namespace setfuse {

/// Two-dimensional Gauss-Bernoulli pair (alpha = 0.8 each, means
/// [0.25, 0.25] and [-0.75, -0.25], covariances rotated by +-pi/4) with a
/// 79 x 101 (kappa, omega) sweep over [1, 40] x [0, 1]. The sweep fixes the
/// major-axis variance at 1.
Scenario gauss_bernoulli_scenario();

/// IID clusters with binomial cardinalities B(trials, success_i) and
/// B(trials, success_j), standard normal localisation, and a
/// (z, omega) sweep over [0.05, 1] x [0, 1].
Scenario binomial_iid_scenario(std::size_t trials, double success_i, double success_j);

struct WeightCurvePoint {
    double kappa;
    FusionResult result;
};

/// Cardinality-consistent fusion of the Gauss-Bernoulli pair for each kappa,
/// with covariances from `sweep`. Point k uses the solver seed
/// derive_seed(config.seed, k).
std::vector<WeightCurvePoint> gauss_bernoulli_weight_curve(const std::vector<double>& kappas, const SweepSpec& sweep,
                                                           const NewtonConfig& config);

struct ReproduceReport {
    std::vector<std::string> summary;
    bool passed = true;
};

/// Regenerates the figure data of a built-in example (ex1..ex4) as CSV
/// files in out_dir, plus summary.txt with the headline numbers and
/// PASS/FAIL against their tolerances.
ReproduceReport reproduce(std::string_view example_id, const std::filesystem::path& out_dir, std::uint64_t seed = 1,
                          std::size_t jobs = 1);

}  // namespace setfuse
