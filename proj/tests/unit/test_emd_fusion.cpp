#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "setfuse/emd_fusion.hpp"
#include "setfuse/error.hpp"
#include "setfuse/gaussian_ops.hpp"

using namespace setfuse;

namespace {

GaussianDensity gauss(double mx, double my, double s = 1.0) {
    Vector m(2);
    m << mx, my;
    return GaussianDensity(m, s * Matrix::Identity(2, 2));
}

std::vector<double> as_vector(const CardinalityPmf& p) { return {p.probs().begin(), p.probs().end()}; }

}  // namespace

TEST(FusedCardinality, IdenticalUnitScales) {
    const auto p = CardinalityPmf::binomial(6, 0.4);
    const std::vector<double> ones(7, 1.0);
    const auto r = fused_cardinality_p2(p, p, ones, 0.3);
    EXPECT_NEAR(r.normalizer, 1.0, 1e-14);
    for (std::size_t n = 0; n <= 6; ++n) EXPECT_NEAR(r.pmf(n), p(n), 1e-14);
}

TEST(FusedCardinality, BernoulliHandValue) {
    const auto p = CardinalityPmf::bernoulli(0.8);
    const std::vector<double> z{1.0, 0.5};
    const auto r = fused_cardinality_p2(p, p, z, 0.5);
    EXPECT_NEAR(r.pmf(1), 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(r.normalizer, 0.6, 1e-14);
}

TEST(FusedCardinality, DisjointSupportsThrow) {
    const std::vector<double> z{1.0, 1.0};
    try {
        fused_cardinality_p2(CardinalityPmf({1.0, 0.0}), CardinalityPmf({0.0, 1.0}), z, 0.5);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_NE(std::string(e.what()).find("incompatible cardinality supports"), std::string::npos);
    }
}

TEST(FusedCardinality, MatchesLinearOracleAndNormalizerBelowOne) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(8), b(8), z(8);
        for (int n = 0; n < 8; ++n) {
            a[n] = u(rng);
            b[n] = u(rng);
            z[n] = n == 0 ? 1.0 : 0.05 + 0.95 * u(rng);
        }
        const auto pa = CardinalityPmf::normalized(a);
        const auto pb = CardinalityPmf::normalized(b);
        const double w = u(rng);
        double norm_ref = 0.0;
        const auto ref = oracle::fuse_pmf(as_vector(pa), as_vector(pb), z, w, &norm_ref);
        const auto r = fused_cardinality_p2(pa, pb, z, w);
        EXPECT_NEAR(r.normalizer, norm_ref, 1e-13);
        EXPECT_LE(r.normalizer, 1.0);
        for (int n = 0; n < 8; ++n) EXPECT_NEAR(r.pmf(n), ref[n], 1e-13);
    }
}

TEST(FusedCardinality, LargeBinomialsStayFinite) {
    const auto pa = CardinalityPmf::binomial(200, 0.99);
    const auto pb = CardinalityPmf::binomial(200, 0.985);
    const auto r = fused_cardinality_p2(pa, pb, geometric_scale_sequence(0.5, 200), 0.5);
    double total = 0.0;
    for (double v : r.pmf.probs()) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_GT(r.normalizer, 0.0);
}

TEST(CardinalityEmd, KnownValueAndEndpoint) {
    const auto pa = CardinalityPmf::bernoulli(0.8);
    const auto pb = CardinalityPmf::bernoulli(0.6);
    const auto r = cardinality_emd(pa, pb, 0.5);
    EXPECT_NEAR(r.pmf(1), std::sqrt(0.48) / (std::sqrt(0.08) + std::sqrt(0.48)), 1e-14);
    const auto endpoint = cardinality_emd(pa, pb, 0.0).pmf;
    for (std::size_t n = 0; n <= 1; ++n) EXPECT_NEAR(endpoint(n), pa(n), 1e-15);
    const auto same = cardinality_emd(pa, pa, 0.7);
    EXPECT_EQ(same.pmf, pa);
    EXPECT_EQ(same.normalizer, 1.0);
}

TEST(CardinalityEmd, DominatesPointwiseMinimum) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(10), b(10);
        for (int n = 0; n < 10; ++n) {
            a[n] = u(rng) < 0.2 ? 0.0 : u(rng);
            b[n] = u(rng) < 0.2 ? 0.0 : u(rng);
        }
        a[3] = b[3] = 0.5;
        const auto pa = CardinalityPmf::normalized(a);
        const auto pb = CardinalityPmf::normalized(b);
        for (int k = 0; k <= 20; ++k) {
            const auto r = cardinality_emd(pa, pb, k / 20.0);
            for (int n = 0; n < 10; ++n) EXPECT_GE(r.pmf(n), std::min(pa(n), pb(n)) * (1 - 1e-12));
        }
    }
}

TEST(BernoulliP2, Values) {
    EXPECT_NEAR(bernoulli_existence_p2(0.8, 0.8, 1.0, 0.3), 0.8, 1e-15);
    EXPECT_NEAR(bernoulli_existence_p2(0.8, 0.8, 0.5, 0.5), 2.0 / 3.0, 1e-14);
    EXPECT_EQ(bernoulli_existence_p2(0.0, 0.0, 0.3, 0.5), 0.0);
    EXPECT_THROW(bernoulli_existence_p2(1.0, 0.0, 0.5, 0.5), SolverError);
}

TEST(BernoulliP2, DiverseSensorsDropBelowHalf) {
    const double pi4 = std::acos(-1.0) / 4;
    Vector mi(2), mj(2);
    mi << 0.25, 0.25;
    mj << -0.75, -0.25;
    const Bernoulli fi(0.8, GaussianDensity(mi, make_rotated_covariance_fixed_major(40, 1, pi4)));
    const Bernoulli fj(0.8, GaussianDensity(mj, make_rotated_covariance_fixed_major(40, 1, -pi4)));
    const auto r = bernoulli_fuse_p2(fi, fj, 0.5);
    EXPECT_LT(r.alpha_omega, 0.5);
    EXPECT_EQ(r.fused.alpha(), r.alpha_omega);
    EXPECT_TRUE(r.fused.loc().gaussian() == gaussian_emd_params(fi.loc().gaussian(), fj.loc().gaussian(), 0.5));
}

TEST(PoissonP2, Values) {
    EXPECT_NEAR(poisson_rate_p2(4, 4, 1.0, 0.6), 4.0, 1e-14);
    EXPECT_NEAR(poisson_rate_p2(2, 8, 0.4, 0.5), 1.6, 1e-14);
    EXPECT_EQ(poisson_rate_p2(0, 8, 0.4, 0.5), 0.0);
    const Poisson fi(2.0, gauss(0, 0));
    const Poisson fj(8.0, gauss(1, 0));
    const auto r = poisson_fuse_p2(fi, fj, 0.0);
    EXPECT_EQ(r.lambda_omega, 2.0);
    EXPECT_EQ(r.fused.loc(), fi.loc());
}

TEST(IidP2, UnitScalePreservesCardinality) {
    const auto p = CardinalityPmf::binomial(5, 0.9);
    const IidCluster f(p, gauss(0, 0));
    const auto r = iid_fuse_p2(f, f, 0.5, 5);
    EXPECT_EQ(r.z_omega, 1.0);
    for (std::size_t n = 0; n <= 5; ++n) EXPECT_NEAR(r.fused.card()(n), p(n), 1e-14);
}

TEST(IidP2, SmallScaleShiftsMapDown) {
    const auto pa = CardinalityPmf::binomial(5, 0.95);
    const auto pb = CardinalityPmf::binomial(5, 0.92);
    const auto r5 = fused_cardinality_p2(pa, pb, geometric_scale_sequence(0.3, 5), 0.5);
    const auto ref5 = oracle::fuse_pmf(oracle::binomial(5, 0.95), oracle::binomial(5, 0.92),
                                       {1, 0.3, 0.09, 0.027, 0.0081, 0.00243}, 0.5);
    EXPECT_EQ(r5.pmf.map(), oracle::argmax_index(ref5));
    EXPECT_LT(r5.pmf.map(), 5u);

    const auto qa = CardinalityPmf::binomial(35, 0.98);
    const auto qb = CardinalityPmf::binomial(35, 0.975);
    const auto r35 = fused_cardinality_p2(qa, qb, geometric_scale_sequence(0.5, 35), 0.5);
    EXPECT_LT(r35.pmf.map(), 35u);
}

TEST(ConsistentEmd, RelationToP2) {
    // f~(X) z(n) = E_p~[z(n)] f(X) on evaluated sets.
    const auto pa = CardinalityPmf::binomial(4, 0.7);
    const auto pb = CardinalityPmf::binomial(4, 0.5);
    const IidCluster fi(pa, gauss(0, 0));
    const IidCluster fj(pb, gauss(1.5, -0.5, 2.0));
    const double w = 0.4;
    const auto p2 = fuse_p2(fi, fj, w);
    const auto consistent = consistent_emd_at(fi, fj, w);
    const double z = emd_scale(fi.loc(), fj.loc(), w);
    const auto card = cardinality_emd(pa, pb, w);
    double expectation = 0.0;
    for (std::size_t n = 0; n <= 4; ++n) expectation += card.pmf(n) * std::pow(z, static_cast<double>(n));

    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    for (std::size_t n = 0; n <= 4; ++n) {
        std::vector<Vector> pts;
        for (std::size_t k = 0; k < n; ++k) {
            Vector x(2);
            x << n01(rng), n01(rng);
            pts.push_back(x);
        }
        const FiniteSet X(pts);
        const double lhs = rfs_density_eval(consistent, X) * std::pow(z, static_cast<double>(n));
        const double rhs = expectation * rfs_density_eval(p2, X);
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs))) << n;
    }
}

TEST(Dispatch, FamilyAndRepresentationMismatch) {
    EXPECT_THROW(fuse_p2(Bernoulli(0.5, gauss(0, 0)), Poisson(1.0, gauss(0, 0)), 0.5), InputError);
    GridGeometry g{Vector::Constant(2, 0.05), Vector::Constant(2, 0.1), {10, 10}};
    const GridDensity uniform(g, std::vector<double>(100, 1.0));
    EXPECT_THROW(emd_scale(gauss(0, 0), uniform, 0.5), InputError);
}
