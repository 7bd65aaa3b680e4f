#include "setfuse/quadrature.hpp"

#include <cmath>
#include <limits>

#include "setfuse/error.hpp"

namespace setfuse {

namespace {

void check_aligned(const GridDensity& a, const GridDensity& b, double omega) {
    if (!a.geometry().aligned_with(b.geometry())) throw InputError("grid densities are not aligned");
    if (!(omega >= 0.0 && omega <= 1.0)) throw InputError("mixture weight must lie in [0, 1]");
}

}  // namespace

GridScaleDerivatives grid_scale_derivatives(const GridDensity& rho_i, const GridDensity& rho_j, double omega) {
    check_aligned(rho_i, rho_j, omega);
    const auto vi = rho_i.values();
    const auto vj = rho_j.values();
    CompensatedSum z;
    CompensatedSum dz;
    CompensatedSum d2z;
    for (std::size_t k = 0; k < vi.size(); ++k) {
        const double a = vi[k];
        const double b = vj[k];
        if (a > 0.0 && b > 0.0) {
            const double log_ratio = std::log(b) - std::log(a);
            const double w = weighted_geometric(a, b, omega);
            z.add(w);
            dz.add(w * log_ratio);
            d2z.add(w * log_ratio * log_ratio);
        } else if (omega == 0.0) {
            z.add(a);
        } else if (omega == 1.0) {
            z.add(b);
        }
    }
    const double vol = rho_i.geometry().cell_volume();
    return {z.value() * vol, dz.value() * vol, std::max(0.0, d2z.value() * vol)};
}

double grid_z_omega(const GridDensity& rho_i, const GridDensity& rho_j, double omega) {
    return grid_scale_derivatives(rho_i, rho_j, omega).z;
}

double grid_z_prime(const GridDensity& rho_i, const GridDensity& rho_j, double omega) {
    return grid_scale_derivatives(rho_i, rho_j, omega).dz;
}

double grid_z_double_prime(const GridDensity& rho_i, const GridDensity& rho_j, double omega) {
    return grid_scale_derivatives(rho_i, rho_j, omega).d2z;
}

GridDensity grid_emd(const GridDensity& rho_i, const GridDensity& rho_j, double omega) {
    check_aligned(rho_i, rho_j, omega);
    if (omega == 0.0 || rho_i == rho_j) return rho_i;
    if (omega == 1.0) return rho_j;
    const auto vi = rho_i.values();
    const auto vj = rho_j.values();
    std::vector<double> values(vi.size());
    CompensatedSum total;
    for (std::size_t k = 0; k < vi.size(); ++k) {
        values[k] = weighted_geometric(vi[k], vj[k], omega);
        total.add(values[k]);
    }
    const double mass = total.value() * rho_i.geometry().cell_volume();
    if (!(mass > 0.0)) throw SolverError("grid densities have disjoint supports");
    for (double& v : values) v /= mass;
    return GridDensity(rho_i.geometry(), std::move(values));
}

double grid_kld(const GridDensity& p, const GridDensity& q) {
    if (!p.geometry().aligned_with(q.geometry())) throw InputError("grid densities are not aligned");
    const auto vp = p.values();
    const auto vq = q.values();
    CompensatedSum acc;
    for (std::size_t k = 0; k < vp.size(); ++k) {
        if (vp[k] == 0.0) continue;
        if (vq[k] == 0.0) return std::numeric_limits<double>::infinity();
        acc.add(vp[k] * (std::log(vp[k]) - std::log(vq[k])));
    }
    return std::max(0.0, acc.value() * p.geometry().cell_volume());
}

McEstimate mc_z_double_prime(const LocalisationDensity& rho_i, const LocalisationDensity& rho_j,
                             const LocalisationDensity& rho_omega, double z_omega, std::size_t samples, Rng& rng) {
    if (samples < 1) throw InputError("Monte-Carlo sample count must be at least 1");
    if (rho_i.dim() != rho_j.dim() || rho_i.dim() != rho_omega.dim()) {
        throw InputError("Monte-Carlo densities have different dimensions");
    }
    const auto max_rejections = static_cast<std::size_t>(0.1 * static_cast<double>(samples));
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();

    McEstimate out;
    CompensatedSum sum;
    CompensatedSum sum_sq;
    std::size_t accepted = 0;
    while (accepted < samples) {
        const Vector x = rho_omega.sample(rng);
        const double li = rho_i.log_evaluate(x);
        const double lj = rho_j.log_evaluate(x);
        if (li == neg_inf || lj == neg_inf) {
            if (++out.rejected > max_rejections) {
                throw SolverError("Monte-Carlo second derivative: more than 10% of draws fell outside a support");
            }
            continue;
        }
        const double sq = (lj - li) * (lj - li);
        sum.add(sq);
        sum_sq.add(sq * sq);
        ++accepted;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum.value() / n;
    const double var = samples > 1 ? std::max(0.0, (sum_sq.value() - n * mean * mean) / (n - 1.0)) : 0.0;
    out.value = z_omega * mean;
    out.std_error = z_omega * std::sqrt(var / n);
    return out;
}

}  // namespace setfuse
