#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "setfuse/gaussian_ops.hpp"

using namespace setfuse;

namespace {

GaussianDensity gauss(double mx, double my, double a, double b, double c) {
    Vector m(2);
    m << mx, my;
    Matrix cov(2, 2);
    cov << a, b, b, c;
    return GaussianDensity(m, cov);
}

oracle::Gauss2 ref(const GaussianDensity& g) {
    return {{g.mean()(0), g.mean()(1)}, g.covariance()(0, 0), g.covariance()(0, 1), g.covariance()(1, 1)};
}

GaussianDensity random_gauss(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mean(-1.5, 1.5);
    std::uniform_real_distribution<double> var(0.2, 2.0);
    std::uniform_real_distribution<double> corr(-0.7, 0.7);
    const double a = var(rng);
    const double c = var(rng);
    return gauss(mean(rng), mean(rng), a, corr(rng) * std::sqrt(a * c), c);
}

}  // namespace

TEST(GaussianEmd, IdenticalAndEndpoints) {
    const auto p = gauss(0, 0, 1, 0, 1);
    const auto q = gauss(1, 2, 2, 0.3, 0.7);
    EXPECT_EQ(gaussian_emd_params(p, p, 0.3), p);
    EXPECT_EQ(gaussian_emd_params(p, q, 0.0), p);
    EXPECT_EQ(gaussian_emd_params(p, q, 1.0), q);
}

TEST(GaussianEmd, EqualCovarianceMidpoint) {
    const auto r = gaussian_emd_params(gauss(0, 0, 1, 0, 1), gauss(2, 0, 1, 0, 1), 0.5);
    EXPECT_NEAR(r.mean()(0), 1.0, 1e-14);
    EXPECT_NEAR(r.mean()(1), 0.0, 1e-14);
    EXPECT_TRUE(r.covariance().isApprox(Matrix::Identity(2, 2), 1e-14));
}

TEST(GaussianEmd, ExchangeSymmetry) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 20; ++k) {
        const auto p = random_gauss(rng);
        const auto q = random_gauss(rng);
        const auto a = gaussian_emd_params(p, q, 0.3);
        const auto b = gaussian_emd_params(q, p, 0.7);
        EXPECT_TRUE(a.mean().isApprox(b.mean(), 1e-12));
        EXPECT_TRUE(a.covariance().isApprox(b.covariance(), 1e-12));
        EXPECT_NEAR(gaussian_emd_scale(p, q, 0.3), gaussian_emd_scale(q, p, 0.7), 1e-13);
    }
}

TEST(GaussianScale, KnownValues) {
    const auto p = gauss(0, 0, 1, 0, 1);
    const auto q = gauss(2, 0, 1, 0, 1);
    EXPECT_EQ(gaussian_emd_scale(p, p, 0.4), 1.0);
    EXPECT_EQ(gaussian_emd_scale(p, q, 0.0), 1.0);
    EXPECT_EQ(gaussian_emd_scale(p, q, 1.0), 1.0);
    EXPECT_NEAR(gaussian_emd_scale(p, q, 0.5), std::exp(-0.5), 1e-14);
    EXPECT_NEAR(gaussian_emd_scale(p, q, 0.5), oracle::quad_scale(ref(p), ref(q), 0.5), 1e-6);
}

TEST(GaussianScale, MatchesQuadratureOnRandomPairs) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> w(0.05, 0.95);
    for (int k = 0; k < 100; ++k) {
        const auto p = random_gauss(rng);
        const auto q = random_gauss(rng);
        const double omega = w(rng);
        const double z = gaussian_emd_scale(p, q, omega);
        EXPECT_LE(z, 1.0);
        EXPECT_NEAR(z, oracle::quad_scale(ref(p), ref(q), omega, 300), 1e-3 * z) << k;
    }
}

TEST(GaussianScale, NegativeLogIsConcaveInWeight) {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 10; ++k) {
        const auto p = random_gauss(rng);
        const auto q = random_gauss(rng);
        std::vector<double> g(101);
        for (int i = 0; i <= 100; ++i) g[i] = -gaussian_log_emd_scale(p, q, i / 100.0);
        for (int i = 1; i < 100; ++i) EXPECT_LE(g[i + 1] - 2 * g[i] + g[i - 1], 1e-8);
    }
}

TEST(GaussianKld, IdentityAndShift) {
    const auto p = gauss(1, 0, 1, 0, 1);
    const auto q = gauss(0, 0, 1, 0, 1);
    EXPECT_EQ(gaussian_kld(p, p), 0.0);
    EXPECT_NEAR(gaussian_kld(p, q), 0.5, 1e-14);
}

TEST(GaussianKld, MatchesMonteCarlo) {
    std::mt19937_64 rng(29);
    for (int k = 0; k < 5; ++k) {
        const auto p = random_gauss(rng);
        const auto q = random_gauss(rng);
        const auto mc = oracle::mc_kld(ref(p), ref(q), 400000, 100 + k);
        EXPECT_NEAR(gaussian_kld(p, q), mc.mean, 4 * mc.std_error + 1e-9) << k;
    }
}

TEST(RotatedCovariance, DeterminantAndCondition) {
    EXPECT_TRUE(make_rotated_covariance(1.0, 0.01, 0.7).isApprox(0.1 * Matrix::Identity(2, 2), 1e-14));
    Matrix expected(2, 2);
    expected << 2.0, 0.0, 0.0, 0.5;
    EXPECT_TRUE(make_rotated_covariance(4.0, 1.0, 0.0).isApprox(expected, 1e-14));

    const Matrix c = make_rotated_covariance(10.0, 0.01, std::numbers::pi / 4);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
    EXPECT_NEAR(eig.eigenvalues()(1) / eig.eigenvalues()(0), 10.0, 1e-9);
    EXPECT_NEAR(c.determinant(), 0.01, 1e-14);
}

TEST(RotatedCovariance, FixedMajorAxis) {
    const Matrix c = make_rotated_covariance_fixed_major(20.0, 1.0, -std::numbers::pi / 4);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
    EXPECT_NEAR(eig.eigenvalues()(1), 1.0, 1e-12);
    EXPECT_NEAR(eig.eigenvalues()(0), 0.05, 1e-12);
}

TEST(GaussianSample, MomentsAndDeterminism) {
    const auto g = gauss(0, 0, 1, 0, 1);
    Rng rng(1);
    const auto xs = gaussian_sample(g, 100000, rng);
    Vector mean = Vector::Zero(2);
    for (const auto& x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    EXPECT_LT(mean.cwiseAbs().maxCoeff(), 0.02);

    Rng a(9), b(9);
    const auto s1 = gaussian_sample(g, 10, a);
    const auto s2 = gaussian_sample(g, 10, b);
    for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(s1[k], s2[k]);

    Rng c(2);
    const auto one = gaussian_sample(g, 1, c);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].size(), 2);
}
