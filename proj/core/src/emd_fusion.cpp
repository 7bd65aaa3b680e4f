#include "setfuse/emd_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "setfuse/error.hpp"
#include "setfuse/gaussian_ops.hpp"
#include "setfuse/quadrature.hpp"

namespace setfuse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

void check_weight(double omega) {
    if (!(omega >= 0.0 && omega <= 1.0)) throw InputError("mixture weight must lie in [0, 1]");
}

}  // namespace

FusedCardinality fused_cardinality_p2(const CardinalityPmf& p_i, const CardinalityPmf& p_j,
                                      std::span<const double> z_seq, double omega) {
    check_weight(omega);
    const std::size_t len = std::max(p_i.size(), p_j.size());
    if (z_seq.size() < len) throw InputError("scale sequence is shorter than the cardinality support");
    if (z_seq.empty() || z_seq[0] != 1.0) throw InputError("scale sequence must start with z(0) = 1");

    std::vector<double> log_terms(len);
    for (std::size_t n = 0; n < len; ++n) {
        const double z = z_seq[n];
        if (!(z >= 0.0) || !std::isfinite(z)) throw InputError("scale factors must be finite and nonnegative");
        const double lw = log_weighted_geometric(safe_log(p_i(n)), safe_log(p_j(n)), omega);
        log_terms[n] = lw == kNegInf ? kNegInf : lw + safe_log(z);
    }
    const double log_norm = log_sum_exp(log_terms);
    if (log_norm == kNegInf) throw SolverError("incompatible cardinality supports");

    std::vector<double> probs(len);
    for (std::size_t n = 0; n < len; ++n) probs[n] = std::exp(log_terms[n] - log_norm);
    return {CardinalityPmf::normalized(std::move(probs)), std::exp(log_norm)};
}

FusedCardinality cardinality_emd(const CardinalityPmf& p_i, const CardinalityPmf& p_j, double omega) {
    if (p_i == p_j) return {p_i, 1.0};
    const std::vector<double> ones(std::max(p_i.size(), p_j.size()), 1.0);
    return fused_cardinality_p2(p_i, p_j, ones, omega);
}

std::vector<double> geometric_scale_sequence(double z, std::size_t n_max) {
    std::vector<double> seq(n_max + 1);
    seq[0] = 1.0;
    for (std::size_t n = 1; n <= n_max; ++n) seq[n] = seq[n - 1] * z;
    return seq;
}

double emd_scale(const LocalisationDensity& rho_i, const LocalisationDensity& rho_j, double omega) {
    if (rho_i.is_gaussian() && rho_j.is_gaussian()) return gaussian_emd_scale(rho_i.gaussian(), rho_j.gaussian(), omega);
    if (rho_i.is_grid() && rho_j.is_grid()) return grid_z_omega(rho_i.grid(), rho_j.grid(), omega);
    throw InputError("localisation densities must both be Gaussian or both be grids");
}

LocalisationDensity emd_localisation(const LocalisationDensity& rho_i, const LocalisationDensity& rho_j,
                                     double omega) {
    if (rho_i.is_gaussian() && rho_j.is_gaussian()) return gaussian_emd_params(rho_i.gaussian(), rho_j.gaussian(), omega);
    if (rho_i.is_grid() && rho_j.is_grid()) return grid_emd(rho_i.grid(), rho_j.grid(), omega);
    throw InputError("localisation densities must both be Gaussian or both be grids");
}

double bernoulli_existence_p2(double alpha_i, double alpha_j, double z_omega, double omega) {
    check_weight(omega);
    const double present = weighted_geometric(alpha_i, alpha_j, omega) * z_omega;
    const double absent = weighted_geometric(1.0 - alpha_i, 1.0 - alpha_j, omega);
    const double total = present + absent;
    if (!(total > 0.0)) throw SolverError("incompatible existence beliefs");
    return present / total;
}

double poisson_rate_p2(double lambda_i, double lambda_j, double z_omega, double omega) {
    check_weight(omega);
    return weighted_geometric(lambda_i, lambda_j, omega) * z_omega;
}

BernoulliFusion bernoulli_fuse_p2(const Bernoulli& f_i, const Bernoulli& f_j, double omega) {
    const double z = emd_scale(f_i.loc(), f_j.loc(), omega);
    const double alpha = bernoulli_existence_p2(f_i.alpha(), f_j.alpha(), z, omega);
    return {Bernoulli(alpha, emd_localisation(f_i.loc(), f_j.loc(), omega)), z, alpha};
}

PoissonFusion poisson_fuse_p2(const Poisson& f_i, const Poisson& f_j, double omega) {
    const double z = emd_scale(f_i.loc(), f_j.loc(), omega);
    const double lambda = poisson_rate_p2(f_i.lambda(), f_j.lambda(), z, omega);
    return {Poisson(lambda, emd_localisation(f_i.loc(), f_j.loc(), omega)), z, lambda};
}

IidFusion iid_fuse_p2(const IidCluster& f_i, const IidCluster& f_j, double omega, std::size_t n_max) {
    const double z = emd_scale(f_i.loc(), f_j.loc(), omega);
    const std::size_t top = std::max({n_max, f_i.card().n_max(), f_j.card().n_max()});
    const auto z_seq = geometric_scale_sequence(z, top);
    auto card = fused_cardinality_p2(f_i.card().padded(top), f_j.card().padded(top), z_seq, omega);
    return {IidCluster(std::move(card.pmf), emd_localisation(f_i.loc(), f_j.loc(), omega)), z, card.normalizer};
}

void require_same_family(const FiniteSetDistribution& f_i, const FiniteSetDistribution& f_j) {
    if (f_i.index() != f_j.index()) {
        throw InputError("cannot fuse a " + std::string(family_name(f_i)) + " with a " +
                         std::string(family_name(f_j)) + " distribution");
    }
}

FiniteSetDistribution fuse_p2(const FiniteSetDistribution& f_i, const FiniteSetDistribution& f_j, double omega) {
    require_same_family(f_i, f_j);
    if (const auto* b = std::get_if<Bernoulli>(&f_i)) return bernoulli_fuse_p2(*b, std::get<Bernoulli>(f_j), omega).fused;
    if (const auto* p = std::get_if<Poisson>(&f_i)) return poisson_fuse_p2(*p, std::get<Poisson>(f_j), omega).fused;
    return iid_fuse_p2(std::get<IidCluster>(f_i), std::get<IidCluster>(f_j), omega, 0).fused;
}

FiniteSetDistribution consistent_emd_at(const FiniteSetDistribution& f_i, const FiniteSetDistribution& f_j,
                                        double omega) {
    require_same_family(f_i, f_j);
    auto loc = emd_localisation(localisation_of(f_i), localisation_of(f_j), omega);
    if (const auto* b = std::get_if<Bernoulli>(&f_i)) {
        const double alpha = bernoulli_existence_p2(b->alpha(), std::get<Bernoulli>(f_j).alpha(), 1.0, omega);
        return Bernoulli(alpha, std::move(loc));
    }
    if (const auto* p = std::get_if<Poisson>(&f_i)) {
        return Poisson(poisson_rate_p2(p->lambda(), std::get<Poisson>(f_j).lambda(), 1.0, omega), std::move(loc));
    }
    auto card = cardinality_emd(std::get<IidCluster>(f_i).card(), std::get<IidCluster>(f_j).card(), omega);
    return IidCluster(std::move(card.pmf), std::move(loc));
}

}  // namespace setfuse
