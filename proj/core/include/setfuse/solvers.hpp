#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "setfuse/core_model.hpp"
#include "setfuse/error.hpp"

namespace setfuse {

/// Settings shared by the Newton weight solvers.
struct NewtonConfig {
    double omega_init = 0.5;
    /// Terminate once consecutive iterates differ by at most this much.
    double epsilon = 1e-4;
    std::size_t max_iters = 50;
    /// Iterates are kept inside [omega_clamp, 1 - omega_clamp].
    double omega_clamp = 1e-6;
    /// Monte-Carlo sample count for the Gaussian second derivative.
    std::size_t mc_samples = 1000;
    std::uint64_t seed = 1;

    /// Throws InputError when a field is out of range.
    void validate() const;
};

struct NewtonStep {
    double omega = 0.0;
    /// -log z at omega.
    double objective = 0.0;
    /// dz/dw and d2z/dw2 at omega.
    double dz = 0.0;
    double d2z = 0.0;
    /// The step that produced this iterate was a bisection fallback.
    bool bisection = false;
};

struct NewtonTrace {
    /// steps.front() is the initial point; one entry per update afterwards.
    std::vector<NewtonStep> steps;
    std::size_t iterations = 0;
    bool converged = false;
    /// Inputs were identical; the weight is fixed at 0.5 without iterating.
    bool degenerate = false;
};

/// SolverError carrying the trace of a run that did not converge.
class NewtonFailure : public SolverError {
public:
    NewtonFailure(const std::string& what, NewtonTrace trace) : SolverError(what), trace_(std::move(trace)) {}
    const NewtonTrace& trace() const { return trace_; }

private:
    NewtonTrace trace_;
};

/// G(w) = -log z_w for a pair of localisation densities (closed form for
/// Gaussians, quadrature for grids). Concave in w, zero at w = 0 and 1.
double chernoff_objective(const LocalisationDensity& rho_i, const LocalisationDensity& rho_j, double omega);

struct LocalisationSolution {
    double omega;
    LocalisationDensity fused;
    double z;
    NewtonTrace trace;
};

/// Maximises -log z_w over w with safeguarded Newton iterations
///   w <- w - z' z / (z'' z - z'^2).
/// Gaussian pairs take z in closed form, z' = z (D(rho_w||rho_i) -
/// D(rho_w||rho_j)) and z'' by Monte Carlo (config.mc_samples draws from
/// rho_w, seeded by config.seed). Grid pairs use quadrature throughout.
/// A step that leaves the current bracket, meets nonnegative curvature, or
/// follows a step that increased |z'| is replaced by bisection.
LocalisationSolution newton_localisation(const LocalisationDensity& rho_i, const LocalisationDensity& rho_j,
                                         const NewtonConfig& config);

struct CardinalitySolution {
    double omega;
    CardinalityPmf fused;
    NewtonTrace trace;
};

/// Maximises -log N~_w, N~_w = sum p_i^(1-w) p_j^w, with the same
/// safeguarded Newton scheme using exact finite sums, and returns the
/// cardinality EMD at the optimum. Identical inputs, or a single common
/// support point, are reported as degenerate with w = 0.5.
CardinalitySolution newton_cardinality(const CardinalityPmf& p_i, const CardinalityPmf& p_j,
                                       const NewtonConfig& config);

struct ClosedFormSolution {
    double omega;
    /// Fused existence probability or Poisson rate.
    double value;
    /// The raw weight formula left [0, 1] and was clamped.
    bool clamped = false;
};

/// Chernoff-optimal weight and fused existence probability for two
/// Bernoulli cardinalities, alpha in (0, 1).
ClosedFormSolution bernoulli_closed_form(double alpha_i, double alpha_j);

/// Chernoff-optimal weight and fused rate for two Poisson cardinalities:
/// w* = log((r - 1) / log r) / log r with r = lambda_j / lambda_i.
ClosedFormSolution poisson_closed_form(double lambda_i, double lambda_j);

/// D(fused || f_i) - D(fused || f_j); zero at the optimal weight.
double kld_balance_residual(const GaussianDensity& fused, const GaussianDensity& f_i, const GaussianDensity& f_j);
double kld_balance_residual(const CardinalityPmf& fused, const CardinalityPmf& f_i, const CardinalityPmf& f_j);
double kld_balance_residual(const GridDensity& fused, const GridDensity& f_i, const GridDensity& f_j);
double kld_balance_residual(const LocalisationDensity& fused, const LocalisationDensity& f_i,
                            const LocalisationDensity& f_j);

struct FusionFlags {
    bool degenerate_localisation = false;
    bool degenerate_cardinality = false;
    bool closed_form_clamped = false;
    /// Fused cardinality pmf drops below both inputs at some n.
    bool cardinality_inconsistent = false;
};

struct FusionResult {
    FiniteSetDistribution fused;
    double omega_card = 0.5;
    /// One weight per localisation problem; a single entry for the
    /// factorised families.
    std::vector<double> omega_loc;
    /// Localisation scale factors at the chosen weights.
    std::vector<double> z_values;
    FusionFlags flags;
    std::optional<NewtonTrace> loc_trace;
    std::optional<NewtonTrace> card_trace;
};

/// Cardinality-consistent fusion: the localisation weight solves the
/// single-object problem (shared by all n for Poisson and IID clusters) and
/// the cardinality weight solves the decoupled cardinality problem, so the
/// fused cardinality never depends on z.
FusionResult consistent_fuse(const FiniteSetDistribution& f_i, const FiniteSetDistribution& f_j,
                             const NewtonConfig& config);

}  // namespace setfuse
