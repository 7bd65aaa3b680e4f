#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "setfuse/numeric.hpp"

using namespace setfuse;

TEST(Numeric, DerivedSeedsAreDistinctAndStable) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(derive_seed(7, k));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
    EXPECT_NE(derive_seed(7, 3), derive_seed(8, 3));
}

TEST(Numeric, CompensatedSumRecoversSmallTerms) {
    CompensatedSum s;
    s.add(1.0);
    for (int k = 0; k < 1000000; ++k) s.add(1e-16);
    s.add(-1.0);
    EXPECT_NEAR(s.value(), 1e-10, 1e-20);
}

TEST(Numeric, LogSumExpHandlesLargeAndEmptyInputs) {
    const std::vector<double> big{1000.0, 1000.0};
    EXPECT_NEAR(log_sum_exp(big), 1000.0 + std::log(2.0), 1e-12);
    const double inf = std::numeric_limits<double>::infinity();
    const std::vector<double> none{-inf, -inf};
    EXPECT_EQ(log_sum_exp(none), -inf);
}

TEST(Numeric, WeightedGeometricEndpointsAndZeros) {
    EXPECT_EQ(weighted_geometric(0.3, 0.7, 0.0), 0.3);
    EXPECT_EQ(weighted_geometric(0.3, 0.7, 1.0), 0.7);
    EXPECT_EQ(weighted_geometric(0.0, 0.7, 0.5), 0.0);
    EXPECT_EQ(weighted_geometric(0.0, 0.7, 0.0), 0.0);
    EXPECT_EQ(weighted_geometric(0.4, 0.4, 0.37), 0.4);
    EXPECT_NEAR(weighted_geometric(0.25, 1.0, 0.5), std::sqrt(0.25), 1e-15);
}

TEST(Numeric, LinspaceHitsEndpointsExactly) {
    const auto v = linspace(1.0, 40.0, 79);
    ASSERT_EQ(v.size(), 79u);
    EXPECT_EQ(v.front(), 1.0);
    EXPECT_EQ(v.back(), 40.0);
    EXPECT_EQ(v[18], 10.0);
    EXPECT_EQ(v[38], 20.0);
}
