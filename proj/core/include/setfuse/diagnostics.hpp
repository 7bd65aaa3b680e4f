#pragma once

#include <cstddef>
#include <span>

#include "setfuse/core_model.hpp"

namespace setfuse {

/// p_fused(n) < min(p_i(n), p_j(n)).
bool is_cardinality_inconsistent(const CardinalityPmf& p_fused, const CardinalityPmf& p_i, const CardinalityPmf& p_j,
                                 std::size_t n);

/// True if the fused pmf falls below both inputs at any n.
bool any_cardinality_inconsistency(const CardinalityPmf& p_fused, const CardinalityPmf& p_i,
                                   const CardinalityPmf& p_j);

/// Cardinality inconsistency of a fused distribution against its inputs.
/// Bernoulli and Poisson use the exact parameter test (alpha or lambda
/// outside the input interval); IID clusters compare pmfs entrywise.
bool cardinality_inconsistent(const FiniteSetDistribution& fused, const FiniteSetDistribution& f_i,
                              const FiniteSetDistribution& f_j);

/// Upper bound on z(n) below which the finite-set EMD is cardinality
/// inconsistent at n:
///   sum_{n' != n} w(n') z(n') / (w(n) / min(p_i(n), p_j(n)) - w(n)),
/// with w = p_i^(1-w) p_j^w. A sufficient condition only. Requires
/// p_i(n), p_j(n) > 0 (InputError "bound undefined" otherwise).
double prop1_bound(const CardinalityPmf& p_i, const CardinalityPmf& p_j, std::span<const double> z_seq, double omega,
                   std::size_t n);

/// Bernoulli specialisation: z_w below the returned value implies the fused
/// existence probability is below min(alpha_i, alpha_j). Returns exactly 1
/// for equal existence probabilities.
double bernoulli_bound(double alpha_i, double alpha_j, double omega);

struct PoissonInconsistency {
    double bound;
    bool triggered;
};

/// bound = min(lambda) / max(lambda); triggered when z_w < bound, which
/// implies lambda_w < min(lambda_i, lambda_j) for every w.
PoissonInconsistency poisson_inconsistency(double lambda_i, double lambda_j, double z_omega);

/// IID cluster bound I_{w,n} = (N_w min(p_i(n), p_j(n)) / w(n))^(1/n), with
/// N_w computed from the geometric sequence z^n for the supplied z_omega.
double iid_bound(const CardinalityPmf& p_i, const CardinalityPmf& p_j, double omega, std::size_t n, double z_omega);

/// eta = log(N_w gamma_w) / log z_w with gamma_w the smallest ratio
/// min(p_i, p_j) / w over the common support. The fused pmf is inconsistent
/// at every common-support n > eta (strict comparison).
double iid_threshold_eta(const CardinalityPmf& p_i, const CardinalityPmf& p_j, double omega, double z_omega);

/// E_{p~_w}[z(n)] / z(n), where p~_w is the cardinality EMD. Values below
/// one mark cardinalities at which the decoupled density can dip below the
/// pointwise minimum of the inputs.
double pointwise_ratio(const CardinalityPmf& p_i, const CardinalityPmf& p_j, std::span<const double> z_seq,
                       double omega, std::size_t n);

}  // namespace setfuse
