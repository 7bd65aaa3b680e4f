#include "setfuse/gaussian_ops.hpp"

#include <cmath>

#include "setfuse/error.hpp"

namespace setfuse {

namespace {

void check_pair(const GaussianDensity& a, const GaussianDensity& b, double omega) {
    if (a.dim() != b.dim()) throw InputError("Gaussian dimensions differ");
    if (!(omega >= 0.0 && omega <= 1.0)) throw InputError("mixture weight must lie in [0, 1]");
}

Matrix rotation(double phi) {
    Matrix r(2, 2);
    r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    return r;
}

Matrix rotated_diagonal(double s1, double s2, double phi) {
    const Matrix r = rotation(phi);
    Matrix sigma = Matrix::Zero(2, 2);
    sigma(0, 0) = s1;
    sigma(1, 1) = s2;
    Matrix c = r * sigma * r.transpose();
    return 0.5 * (c + c.transpose());
}

}  // namespace

GaussianDensity gaussian_emd_params(const GaussianDensity& rho_i, const GaussianDensity& rho_j, double omega) {
    check_pair(rho_i, rho_j, omega);
    if (omega == 0.0 || rho_i == rho_j) return rho_i;
    if (omega == 1.0) return rho_j;

    const Matrix info = (1.0 - omega) * rho_i.precision() + omega * rho_j.precision();
    const Vector info_mean = (1.0 - omega) * rho_i.precision() * rho_i.mean() + omega * rho_j.precision() * rho_j.mean();
    Eigen::LLT<Matrix> llt(0.5 * (info + info.transpose()));
    if (llt.info() != Eigen::Success) throw InputError("fused information matrix is not positive definite");
    const auto d = static_cast<Eigen::Index>(rho_i.dim());
    Matrix cov = llt.solve(Matrix::Identity(d, d));
    cov = 0.5 * (cov + cov.transpose());
    Vector mean = llt.solve(info_mean);
    return GaussianDensity(std::move(mean), std::move(cov));
}

double gaussian_log_emd_scale(const GaussianDensity& rho_i, const GaussianDensity& rho_j, double omega) {
    check_pair(rho_i, rho_j, omega);
    if (omega == 0.0 || omega == 1.0 || rho_i == rho_j) return 0.0;

    // log z = -1/2 [ (1-w) log|C_i| + w log|C_j| - log|C_w| ]
    //         -1/2 w (1-w) d^T ((1-w) C_j + w C_i)^-1 d,   d = m_i - m_j
    const Matrix info = (1.0 - omega) * rho_i.precision() + omega * rho_j.precision();
    Eigen::LLT<Matrix> info_llt(0.5 * (info + info.transpose()));
    if (info_llt.info() != Eigen::Success) throw InputError("fused information matrix is not positive definite");
    const double log_det_info = 2.0 * Matrix(info_llt.matrixL()).diagonal().array().log().sum();

    const Matrix mixed = (1.0 - omega) * rho_j.covariance() + omega * rho_i.covariance();
    Eigen::LLT<Matrix> mixed_llt(0.5 * (mixed + mixed.transpose()));
    if (mixed_llt.info() != Eigen::Success) throw InputError("mixed covariance is not positive definite");
    const Vector delta = rho_i.mean() - rho_j.mean();
    const double quad = delta.dot(mixed_llt.solve(delta));

    const double log_z =
        -0.5 * ((1.0 - omega) * rho_i.log_det() + omega * rho_j.log_det() + log_det_info) -
        0.5 * omega * (1.0 - omega) * quad;
    return std::min(0.0, log_z);
}

double gaussian_emd_scale(const GaussianDensity& rho_i, const GaussianDensity& rho_j, double omega) {
    return std::exp(gaussian_log_emd_scale(rho_i, rho_j, omega));
}

double gaussian_kld(const GaussianDensity& p, const GaussianDensity& q) {
    if (p.dim() != q.dim()) throw InputError("Gaussian dimensions differ");
    if (p == q) return 0.0;
    const double d = static_cast<double>(p.dim());
    const Vector delta = p.mean() - q.mean();
    const double trace = (q.precision() * p.covariance()).trace();
    const double quad = delta.dot(q.precision() * delta);
    return std::max(0.0, 0.5 * (q.log_det() - p.log_det() + trace + quad - d));
}

Matrix make_rotated_covariance(double kappa, double det_sigma, double phi) {
    if (!(kappa >= 1.0)) throw InputError("condition number kappa must be >= 1");
    if (!(det_sigma > 0.0)) throw InputError("det_sigma must be positive");
    return rotated_diagonal(std::sqrt(kappa * det_sigma), std::sqrt(det_sigma / kappa), phi);
}

Matrix make_rotated_covariance_fixed_major(double kappa, double major_variance, double phi) {
    if (!(kappa >= 1.0)) throw InputError("condition number kappa must be >= 1");
    if (!(major_variance > 0.0)) throw InputError("major_variance must be positive");
    return rotated_diagonal(major_variance, major_variance / kappa, phi);
}

std::vector<Vector> gaussian_sample(const GaussianDensity& rho, std::size_t count, Rng& rng) {
    if (count < 1) throw InputError("sample count must be at least 1");
    std::vector<Vector> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(rho.sample(rng));
    return out;
}

}  // namespace setfuse
