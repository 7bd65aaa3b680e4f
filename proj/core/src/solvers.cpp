#include "setfuse/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "setfuse/diagnostics.hpp"
#include "setfuse/emd_fusion.hpp"
#include "setfuse/gaussian_ops.hpp"
#include "setfuse/quadrature.hpp"

namespace setfuse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log z at w together with z'/z and z''/z.
struct ScaledDerivatives {
    double log_z;
    double r1;
    double r2;
};

using Evaluator = std::function<ScaledDerivatives(double)>;

NewtonStep make_step(double omega, const ScaledDerivatives& e, bool bisection) {
    const double z = std::exp(e.log_z);
    return {omega, -e.log_z, z * e.r1, z * e.r2, bisection};
}

NewtonTrace degenerate_trace(double omega) {
    NewtonTrace trace;
    trace.steps.push_back({omega, 0.0, 0.0, 0.0, false});
    trace.converged = true;
    trace.degenerate = true;
    return trace;
}

// Safeguarded Newton maximisation of -log z on [clamp, 1 - clamp].
NewtonTrace run_newton(const Evaluator& evaluate, const NewtonConfig& config) {
    double lo = config.omega_clamp;
    double hi = 1.0 - config.omega_clamp;
    double omega = std::clamp(config.omega_init, lo, hi);

    NewtonTrace trace;
    ScaledDerivatives e = evaluate(omega);
    trace.steps.push_back(make_step(omega, e, false));
    if (e.r1 == 0.0 && e.r2 == 0.0) {
        trace.converged = true;
        trace.degenerate = true;
        return trace;
    }

    bool force_bisection = false;
    for (std::size_t k = 1; k <= config.max_iters; ++k) {
        if (e.r1 == 0.0) {
            trace.converged = true;
            break;
        }
        // z' > 0 means the objective decreases to the right.
        if (e.r1 > 0.0) hi = std::min(hi, omega);
        else lo = std::max(lo, omega);

        const double curvature = e.r2 - e.r1 * e.r1;
        double next = std::numeric_limits<double>::quiet_NaN();
        if (curvature > 0.0 && std::isfinite(curvature)) next = omega - e.r1 / curvature;
        const bool bisection = force_bisection || !(next > lo && next < hi);
        if (bisection) next = 0.5 * (lo + hi);

        const ScaledDerivatives e_next = evaluate(next);
        trace.steps.push_back(make_step(next, e_next, bisection));
        trace.iterations = k;
        force_bisection = std::abs(e_next.r1) > std::abs(e.r1);

        const double step = std::abs(next - omega);
        omega = next;
        e = e_next;
        if (step <= config.epsilon) {
            trace.converged = true;
            break;
        }
    }
    if (!trace.converged) throw NewtonFailure("Newton iterations did not converge within max_iters", trace);
    return trace;
}

Evaluator gaussian_evaluator(const GaussianDensity& rho_i, const GaussianDensity& rho_j, const NewtonConfig& config,
                             Rng& rng) {
    return [&rho_i, &rho_j, &config, &rng](double omega) {
        const double log_z = gaussian_log_emd_scale(rho_i, rho_j, omega);
        const GaussianDensity fused = gaussian_emd_params(rho_i, rho_j, omega);
        const double r1 = gaussian_kld(fused, rho_i) - gaussian_kld(fused, rho_j);
        const LocalisationDensity li(rho_i);
        const LocalisationDensity lj(rho_j);
        const double r2 = mc_z_double_prime(li, lj, LocalisationDensity(fused), 1.0, config.mc_samples, rng).value;
        return ScaledDerivatives{log_z, r1, r2};
    };
}

Evaluator grid_evaluator(const GridDensity& rho_i, const GridDensity& rho_j) {
    return [&rho_i, &rho_j](double omega) {
        const auto d = grid_scale_derivatives(rho_i, rho_j, omega);
        if (!(d.z > 0.0)) throw SolverError("grid densities have disjoint supports");
        return ScaledDerivatives{std::log(d.z), d.dz / d.z, d.d2z / d.z};
    };
}

// Common support of two pmfs with log p_i, log p_j on it.
struct CommonSupport {
    std::vector<double> log_pi;
    std::vector<double> log_pj;
};

CommonSupport common_support(const CardinalityPmf& p_i, const CardinalityPmf& p_j) {
    CommonSupport s;
    const std::size_t len = std::max(p_i.size(), p_j.size());
    for (std::size_t n = 0; n < len; ++n) {
        if (p_i(n) > 0.0 && p_j(n) > 0.0) {
            s.log_pi.push_back(std::log(p_i(n)));
            s.log_pj.push_back(std::log(p_j(n)));
        }
    }
    return s;
}

Evaluator cardinality_evaluator(const CommonSupport& support) {
    return [&support](double omega) {
        const std::size_t m = support.log_pi.size();
        std::vector<double> log_w(m);
        for (std::size_t k = 0; k < m; ++k) {
            log_w[k] = (1.0 - omega) * support.log_pi[k] + omega * support.log_pj[k];
        }
        const double log_norm = log_sum_exp(log_w);
        CompensatedSum r1;
        CompensatedSum r2;
        for (std::size_t k = 0; k < m; ++k) {
            const double q = std::exp(log_w[k] - log_norm);
            const double ratio = support.log_pj[k] - support.log_pi[k];
            r1.add(q * ratio);
            r2.add(q * ratio * ratio);
        }
        return ScaledDerivatives{log_norm, r1.value(), r2.value()};
    };
}

}  // namespace

void NewtonConfig::validate() const {
    if (!(omega_init >= 0.0 && omega_init <= 1.0)) throw InputError("omega_init must lie in [0, 1]");
    if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
    if (max_iters < 1) throw InputError("max_iters must be at least 1");
    if (!(omega_clamp >= 0.0 && omega_clamp < 0.5)) throw InputError("omega_clamp must lie in [0, 0.5)");
    if (mc_samples < 1) throw InputError("mc_samples must be at least 1");
}

double chernoff_objective(const LocalisationDensity& rho_i, const LocalisationDensity& rho_j, double omega) {
    if (!(omega >= 0.0 && omega <= 1.0)) throw InputError("mixture weight must lie in [0, 1]");
    if (rho_i.is_gaussian() && rho_j.is_gaussian()) {
        return -gaussian_log_emd_scale(rho_i.gaussian(), rho_j.gaussian(), omega);
    }
    const double z = emd_scale(rho_i, rho_j, omega);
    return std::max(0.0, -std::log(z));
}

LocalisationSolution newton_localisation(const LocalisationDensity& rho_i, const LocalisationDensity& rho_j,
                                         const NewtonConfig& config) {
    config.validate();
    if (rho_i.dim() != rho_j.dim()) throw InputError("localisation densities have different dimensions");
    if (rho_i == rho_j) return {0.5, rho_i, 1.0, degenerate_trace(0.5)};

    NewtonTrace trace;
    if (rho_i.is_gaussian() && rho_j.is_gaussian()) {
        Rng rng(config.seed);
        trace = run_newton(gaussian_evaluator(rho_i.gaussian(), rho_j.gaussian(), config, rng), config);
    } else if (rho_i.is_grid() && rho_j.is_grid()) {
        if (!rho_i.grid().geometry().aligned_with(rho_j.grid().geometry())) {
            throw InputError("grid densities are not aligned");
        }
        trace = run_newton(grid_evaluator(rho_i.grid(), rho_j.grid()), config);
    } else {
        throw InputError("localisation densities must both be Gaussian or both be grids");
    }
    if (trace.degenerate) return {0.5, rho_i, 1.0, degenerate_trace(0.5)};

    const double omega = trace.steps.back().omega;
    return {omega, emd_localisation(rho_i, rho_j, omega), emd_scale(rho_i, rho_j, omega), std::move(trace)};
}

CardinalitySolution newton_cardinality(const CardinalityPmf& p_i, const CardinalityPmf& p_j,
                                       const NewtonConfig& config) {
    config.validate();
    if (p_i.padded(p_j.n_max()) == p_j.padded(p_i.n_max())) return {0.5, p_i, degenerate_trace(0.5)};

    const CommonSupport support = common_support(p_i, p_j);
    if (support.log_pi.empty()) throw SolverError("incompatible cardinality supports");
    if (support.log_pi.size() == 1) {
        return {0.5, cardinality_emd(p_i, p_j, 0.5).pmf, degenerate_trace(0.5)};
    }

    NewtonTrace trace = run_newton(cardinality_evaluator(support), config);
    const double omega = trace.degenerate ? 0.5 : trace.steps.back().omega;
    return {omega, cardinality_emd(p_i, p_j, omega).pmf, std::move(trace)};
}

ClosedFormSolution bernoulli_closed_form(double alpha_i, double alpha_j) {
    if (!(alpha_i > 0.0 && alpha_i < 1.0 && alpha_j > 0.0 && alpha_j < 1.0)) {
        throw InputError("closed-form Bernoulli weight needs existence probabilities in (0, 1)");
    }
    if (std::abs(alpha_i - alpha_j) < 1e-12) return {0.5, alpha_i, false};

    const double log_absent = std::log((1.0 - alpha_i) / (1.0 - alpha_j));
    const double log_present = std::log(alpha_j / alpha_i);
    double omega = (std::log(log_absent / log_present) - std::log(alpha_i / (1.0 - alpha_i))) /
                   (log_absent + log_present);
    bool clamped = false;
    if (!(omega >= 0.0 && omega <= 1.0)) {
        omega = std::clamp(std::isfinite(omega) ? omega : 0.5, 0.0, 1.0);
        clamped = true;
    }
    const double present = weighted_geometric(alpha_i, alpha_j, omega);
    const double absent = weighted_geometric(1.0 - alpha_i, 1.0 - alpha_j, omega);
    return {omega, present / (present + absent), clamped};
}

ClosedFormSolution poisson_closed_form(double lambda_i, double lambda_j) {
    if (!(lambda_i > 0.0 && lambda_j > 0.0)) throw InputError("closed-form Poisson weight needs positive rates");
    if (std::abs(lambda_i - lambda_j) < 1e-12 * std::max(lambda_i, lambda_j)) return {0.5, lambda_i, false};

    const double ratio = lambda_j / lambda_i;
    const double log_ratio = std::log(ratio);
    double omega = std::log((ratio - 1.0) / log_ratio) / log_ratio;
    bool clamped = false;
    if (!(omega >= 0.0 && omega <= 1.0)) {
        omega = std::clamp(std::isfinite(omega) ? omega : 0.5, 0.0, 1.0);
        clamped = true;
    }
    return {omega, weighted_geometric(lambda_i, lambda_j, omega), clamped};
}

double kld_balance_residual(const GaussianDensity& fused, const GaussianDensity& f_i, const GaussianDensity& f_j) {
    return gaussian_kld(fused, f_i) - gaussian_kld(fused, f_j);
}

double kld_balance_residual(const CardinalityPmf& fused, const CardinalityPmf& f_i, const CardinalityPmf& f_j) {
    return pmf_kld(fused, f_i) - pmf_kld(fused, f_j);
}

double kld_balance_residual(const GridDensity& fused, const GridDensity& f_i, const GridDensity& f_j) {
    return grid_kld(fused, f_i) - grid_kld(fused, f_j);
}

double kld_balance_residual(const LocalisationDensity& fused, const LocalisationDensity& f_i,
                            const LocalisationDensity& f_j) {
    if (fused.is_gaussian() && f_i.is_gaussian() && f_j.is_gaussian()) {
        return kld_balance_residual(fused.gaussian(), f_i.gaussian(), f_j.gaussian());
    }
    if (fused.is_grid() && f_i.is_grid() && f_j.is_grid()) {
        return kld_balance_residual(fused.grid(), f_i.grid(), f_j.grid());
    }
    throw InputError("KLD balance needs densities of the same kind");
}

FusionResult consistent_fuse(const FiniteSetDistribution& f_i, const FiniteSetDistribution& f_j,
                             const NewtonConfig& config) {
    require_same_family(f_i, f_j);
    auto loc = newton_localisation(localisation_of(f_i), localisation_of(f_j), config);

    FusionFlags flags;
    flags.degenerate_localisation = loc.trace.degenerate;
    std::optional<NewtonTrace> card_trace;
    double omega_card = 0.5;
    std::optional<FiniteSetDistribution> fused;

    if (const auto* bi = std::get_if<Bernoulli>(&f_i)) {
        const auto& bj = std::get<Bernoulli>(f_j);
        const bool interior = bi->alpha() > 0.0 && bi->alpha() < 1.0 && bj.alpha() > 0.0 && bj.alpha() < 1.0;
        std::optional<ClosedFormSolution> closed;
        if (interior) {
            closed = bernoulli_closed_form(bi->alpha(), bj.alpha());
            flags.closed_form_clamped = closed->clamped;
        }
        double alpha = 0.0;
        if (closed && !closed->clamped) {
            omega_card = closed->omega;
            alpha = closed->value;
            flags.degenerate_cardinality = bi->alpha() == bj.alpha();
        } else {
            auto card = newton_cardinality(CardinalityPmf::bernoulli(bi->alpha()),
                                           CardinalityPmf::bernoulli(bj.alpha()), config);
            omega_card = card.omega;
            alpha = card.fused(1);
            flags.degenerate_cardinality = card.trace.degenerate;
            card_trace = std::move(card.trace);
        }
        fused = Bernoulli(alpha, loc.fused);
    } else if (const auto* pi = std::get_if<Poisson>(&f_i)) {
        const auto& pj = std::get<Poisson>(f_j);
        double lambda = 0.0;
        if (pi->lambda() > 0.0 && pj.lambda() > 0.0) {
            const auto closed = poisson_closed_form(pi->lambda(), pj.lambda());
            omega_card = closed.omega;
            lambda = closed.value;
            flags.closed_form_clamped = closed.clamped;
            flags.degenerate_cardinality = pi->lambda() == pj.lambda();
        } else {
            // A zero rate leaves n = 0 as the only common cardinality.
            flags.degenerate_cardinality = true;
        }
        fused = Poisson(lambda, loc.fused);
    } else {
        const auto& ci = std::get<IidCluster>(f_i).card();
        const auto& cj = std::get<IidCluster>(f_j).card();
        const std::size_t top = std::max(ci.n_max(), cj.n_max());
        auto card = newton_cardinality(ci.padded(top), cj.padded(top), config);
        omega_card = card.omega;
        flags.degenerate_cardinality = card.trace.degenerate;
        card_trace = std::move(card.trace);
        fused = IidCluster(std::move(card.fused), loc.fused);
    }
    flags.cardinality_inconsistent = cardinality_inconsistent(*fused, f_i, f_j);

    return {std::move(*fused), omega_card, {loc.omega}, {loc.z}, flags, std::move(loc.trace), std::move(card_trace)};
}

}  // namespace setfuse
