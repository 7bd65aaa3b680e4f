#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "setfuse/core_model.hpp"

namespace setfuse {

/// A normalised cardinality pmf together with the normaliser that was
/// divided out.
struct FusedCardinality {
    CardinalityPmf pmf;
    double normalizer = 1.0;
};

/// Cardinality of the finite-set EMD:
///   p_w(n) = p_i(n)^(1-w) p_j(n)^w z(n) / N_w.
/// The shorter pmf is zero-padded; z_seq must cover the padded support and
/// start with 1. For w in (0, 1) the support is the intersection of the
/// input supports; at w = 0 or 1 the endpoint pmf enters verbatim.
/// Throws SolverError("incompatible cardinality supports") when N_w = 0.
FusedCardinality fused_cardinality_p2(const CardinalityPmf& p_i, const CardinalityPmf& p_j,
                                      std::span<const double> z_seq, double omega);

/// EMD of two cardinality pmfs (all scale factors equal to one).
FusedCardinality cardinality_emd(const CardinalityPmf& p_i, const CardinalityPmf& p_j, double omega);

/// [1, z, z^2, ..., z^n_max].
std::vector<double> geometric_scale_sequence(double z, std::size_t n_max);

/// Single-object scale factor z_w for a pair of localisation densities of
/// the same kind (Gaussian closed form or grid quadrature).
double emd_scale(const LocalisationDensity& rho_i, const LocalisationDensity& rho_j, double omega);

/// Single-object EMD rho_w for a pair of localisation densities.
LocalisationDensity emd_localisation(const LocalisationDensity& rho_i, const LocalisationDensity& rho_j,
                                     double omega);

/// Existence probability of the Bernoulli EMD for a given scale factor z.
/// Throws SolverError("incompatible existence beliefs") when one input is
/// certain of existence and the other of absence and w is in (0, 1).
double bernoulli_existence_p2(double alpha_i, double alpha_j, double z_omega, double omega);

/// lambda_w = lambda_i^(1-w) lambda_j^w z.
double poisson_rate_p2(double lambda_i, double lambda_j, double z_omega, double omega);

struct BernoulliFusion {
    Bernoulli fused;
    double z_omega;
    double alpha_omega;
};

struct PoissonFusion {
    Poisson fused;
    double z_omega;
    double lambda_omega;
};

struct IidFusion {
    IidCluster fused;
    double z_omega;
    double normalizer;
};

BernoulliFusion bernoulli_fuse_p2(const Bernoulli& f_i, const Bernoulli& f_j, double omega);
PoissonFusion poisson_fuse_p2(const Poisson& f_i, const Poisson& f_j, double omega);
/// Fused pmf covers 0..max(n_max, input supports).
IidFusion iid_fuse_p2(const IidCluster& f_i, const IidCluster& f_j, double omega, std::size_t n_max);

/// Finite-set EMD of two distributions of the same family.
FiniteSetDistribution fuse_p2(const FiniteSetDistribution& f_i, const FiniteSetDistribution& f_j, double omega);

/// Cardinality-decoupled density at a single weight: cardinality EMD and
/// localisation EMD both taken at `omega`, without the z(n) coupling.
FiniteSetDistribution consistent_emd_at(const FiniteSetDistribution& f_i, const FiniteSetDistribution& f_j,
                                        double omega);

/// Throws InputError unless both distributions belong to the same family.
void require_same_family(const FiniteSetDistribution& f_i, const FiniteSetDistribution& f_j);

}  // namespace setfuse
