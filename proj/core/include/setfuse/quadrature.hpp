#pragma once

#include <cstddef>

#include "setfuse/core_model.hpp"

namespace setfuse {

// Midpoint-rule integrals over two aligned grid densities. Cells where
// both densities vanish contribute nothing; for the derivatives, cells where
// exactly one vanishes are excluded as well (the integrand tends to 0 there
// for w in (0, 1)).

/// z_w = sum rho_i^(1-w) rho_j^w dV.
double grid_z_omega(const GridDensity& rho_i, const GridDensity& rho_j, double omega);

/// dz/dw = sum rho_i^(1-w) rho_j^w log(rho_j / rho_i) dV.
double grid_z_prime(const GridDensity& rho_i, const GridDensity& rho_j, double omega);

/// d2z/dw2 = sum rho_i^(1-w) rho_j^w log(rho_j / rho_i)^2 dV; always >= 0.
double grid_z_double_prime(const GridDensity& rho_i, const GridDensity& rho_j, double omega);

/// The three grid sums above from a single pass.
struct GridScaleDerivatives {
    double z = 0.0;
    double dz = 0.0;
    double d2z = 0.0;
};
GridScaleDerivatives grid_scale_derivatives(const GridDensity& rho_i, const GridDensity& rho_j, double omega);

/// Normalised rho_i^(1-w) rho_j^w on the shared grid.
GridDensity grid_emd(const GridDensity& rho_i, const GridDensity& rho_j, double omega);

/// D(p || q) by midpoint rule; +inf if p has mass where q has none.
double grid_kld(const GridDensity& p, const GridDensity& q);

/// Monte-Carlo estimate of d2z/dw2 with its standard error.
struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t rejected = 0;
};

/// z_w * mean over x ~ rho_omega of log(rho_j(x) / rho_i(x))^2 using L
/// draws. Draws where rho_i or rho_j vanish are redrawn; more than 10%
/// redraws raise SolverError.
McEstimate mc_z_double_prime(const LocalisationDensity& rho_i, const LocalisationDensity& rho_j,
                             const LocalisationDensity& rho_omega, double z_omega, std::size_t samples, Rng& rng);

}  // namespace setfuse
