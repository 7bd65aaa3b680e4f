#include "setfuse/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "setfuse/emd_fusion.hpp"
#include "setfuse/error.hpp"

namespace setfuse {

namespace {

void check_weight(double omega) {
    if (!(omega >= 0.0 && omega <= 1.0)) throw InputError("mixture weight must lie in [0, 1]");
}

}  // namespace

bool is_cardinality_inconsistent(const CardinalityPmf& p_fused, const CardinalityPmf& p_i, const CardinalityPmf& p_j,
                                 std::size_t n) {
    return p_fused(n) < std::min(p_i(n), p_j(n));
}

bool any_cardinality_inconsistency(const CardinalityPmf& p_fused, const CardinalityPmf& p_i,
                                   const CardinalityPmf& p_j) {
    const std::size_t len = std::max({p_fused.size(), p_i.size(), p_j.size()});
    for (std::size_t n = 0; n < len; ++n) {
        if (is_cardinality_inconsistent(p_fused, p_i, p_j, n)) return true;
    }
    return false;
}

bool cardinality_inconsistent(const FiniteSetDistribution& fused, const FiniteSetDistribution& f_i,
                              const FiniteSetDistribution& f_j) {
    require_same_family(f_i, f_j);
    require_same_family(fused, f_i);
    if (const auto* b = std::get_if<Bernoulli>(&fused)) {
        const double a_i = std::get<Bernoulli>(f_i).alpha();
        const double a_j = std::get<Bernoulli>(f_j).alpha();
        return b->alpha() < std::min(a_i, a_j) || b->alpha() > std::max(a_i, a_j);
    }
    if (const auto* p = std::get_if<Poisson>(&fused)) {
        const double l_i = std::get<Poisson>(f_i).lambda();
        const double l_j = std::get<Poisson>(f_j).lambda();
        return p->lambda() < std::min(l_i, l_j) || p->lambda() > std::max(l_i, l_j);
    }
    return any_cardinality_inconsistency(std::get<IidCluster>(fused).card(), std::get<IidCluster>(f_i).card(),
                                         std::get<IidCluster>(f_j).card());
}

double prop1_bound(const CardinalityPmf& p_i, const CardinalityPmf& p_j, std::span<const double> z_seq, double omega,
                   std::size_t n) {
    check_weight(omega);
    if (!(p_i(n) > 0.0 && p_j(n) > 0.0)) throw InputError("bound undefined: zero probability at n");
    const std::size_t len = std::max(p_i.size(), p_j.size());
    if (z_seq.size() < len) throw InputError("scale sequence is shorter than the cardinality support");

    CompensatedSum rest;
    for (std::size_t m = 0; m < len; ++m) {
        if (m == n) continue;
        rest.add(weighted_geometric(p_i(m), p_j(m), omega) * z_seq[m]);
    }
    const double w = weighted_geometric(p_i(n), p_j(n), omega);
    const double denom = w / std::min(p_i(n), p_j(n)) - w;
    // Both inputs certain of n: the fused pmf is the same point mass.
    if (denom <= 0.0) return 0.0;
    return rest.value() / denom;
}

double bernoulli_bound(double alpha_i, double alpha_j, double omega) {
    check_weight(omega);
    if (!(alpha_i > 0.0 && alpha_i < 1.0 && alpha_j > 0.0 && alpha_j < 1.0)) {
        throw InputError("Bernoulli bound needs existence probabilities in (0, 1)");
    }
    const double absent = weighted_geometric(1.0 - alpha_i, 1.0 - alpha_j, omega);
    const double present = weighted_geometric(alpha_i, alpha_j, omega);
    return absent / (present / std::min(alpha_i, alpha_j) - present);
}

PoissonInconsistency poisson_inconsistency(double lambda_i, double lambda_j, double z_omega) {
    if (!(lambda_i > 0.0 && lambda_j > 0.0)) throw InputError("Poisson bound needs positive rates");
    const double bound = std::min(lambda_i, lambda_j) / std::max(lambda_i, lambda_j);
    return {bound, z_omega < bound};
}

double iid_bound(const CardinalityPmf& p_i, const CardinalityPmf& p_j, double omega, std::size_t n, double z_omega) {
    check_weight(omega);
    if (n == 0) throw InputError("IID bound undefined at n = 0");
    if (!(p_i(n) > 0.0 && p_j(n) > 0.0)) throw InputError("bound undefined: zero probability at n");
    const std::size_t top = std::max(p_i.n_max(), p_j.n_max());
    const auto fused = fused_cardinality_p2(p_i.padded(top), p_j.padded(top), geometric_scale_sequence(z_omega, top), omega);
    const double w = weighted_geometric(p_i(n), p_j(n), omega);
    return std::pow(fused.normalizer * std::min(p_i(n), p_j(n)) / w, 1.0 / static_cast<double>(n));
}

double iid_threshold_eta(const CardinalityPmf& p_i, const CardinalityPmf& p_j, double omega, double z_omega) {
    check_weight(omega);
    if (!(z_omega > 0.0)) throw InputError("eta needs a positive scale factor");
    if (z_omega >= 1.0) throw InputError("eta undefined for z_omega >= 1");
    const std::size_t top = std::max(p_i.n_max(), p_j.n_max());
    const auto fused = fused_cardinality_p2(p_i.padded(top), p_j.padded(top), geometric_scale_sequence(z_omega, top), omega);

    double gamma = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n <= top; ++n) {
        if (!(p_i(n) > 0.0 && p_j(n) > 0.0)) continue;
        gamma = std::min(gamma, std::min(p_i(n), p_j(n)) / weighted_geometric(p_i(n), p_j(n), omega));
    }
    if (!std::isfinite(gamma)) throw SolverError("incompatible cardinality supports");
    return std::log(fused.normalizer * gamma) / std::log(z_omega);
}

double pointwise_ratio(const CardinalityPmf& p_i, const CardinalityPmf& p_j, std::span<const double> z_seq,
                       double omega, std::size_t n) {
    if (n >= z_seq.size()) throw InputError("n lies beyond the scale sequence");
    if (!(z_seq[n] > 0.0)) throw InputError("pointwise ratio undefined where z(n) = 0");
    const auto emd = cardinality_emd(p_i, p_j, omega);
    if (emd.pmf.size() > z_seq.size()) throw InputError("scale sequence is shorter than the cardinality support");
    CompensatedSum expectation;
    for (std::size_t m = 0; m < emd.pmf.size(); ++m) expectation.add(emd.pmf(m) * z_seq[m]);
    return expectation.value() / z_seq[n];
}

}  // namespace setfuse
