#pragma once

#include <cstddef>
#include <vector>

#include "setfuse/core_model.hpp"

namespace setfuse {

/// Exponential mixture N(m_w, C_w) of two Gaussians (covariance
/// intersection): C_w = ((1-w) C_i^-1 + w C_j^-1)^-1,
/// m_w = C_w ((1-w) C_i^-1 m_i + w C_j^-1 m_j). Endpoints return the inputs.
GaussianDensity gaussian_emd_params(const GaussianDensity& rho_i, const GaussianDensity& rho_j, double omega);

/// log of z_w = integral of rho_i^(1-w) rho_j^w; always <= 0.
double gaussian_log_emd_scale(const GaussianDensity& rho_i, const GaussianDensity& rho_j, double omega);

/// z_w in (0, 1]; equals 1 iff the inputs coincide or w is 0 or 1.
double gaussian_emd_scale(const GaussianDensity& rho_i, const GaussianDensity& rho_j, double omega);

/// Closed-form D(p || q) in nats.
double gaussian_kld(const GaussianDensity& p, const GaussianDensity& q);

/// R(phi) diag(s1, s2) R(phi)^T with s1 s2 = det_sigma and s1 / s2 = kappa.
Matrix make_rotated_covariance(double kappa, double det_sigma, double phi);

/// R(phi) diag(s1, s1 / kappa) R(phi)^T: the major-axis variance s1 stays
/// fixed while the minor axis shrinks with kappa.
Matrix make_rotated_covariance_fixed_major(double kappa, double major_variance, double phi);

/// `count` i.i.d. draws from rho using the caller's engine.
std::vector<Vector> gaussian_sample(const GaussianDensity& rho, std::size_t count, Rng& rng);

}  // namespace setfuse
