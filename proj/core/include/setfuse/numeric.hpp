#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace setfuse {

/// Random engine used throughout the library. Callers own the state.
using Rng = std::mt19937_64;

/// Derives an independent seed for stream `index` from a base seed
/// (SplitMix64 finaliser), so parallel cells do not share a stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

/// log(sum(exp(v))) with max subtraction; -inf for empty or all -inf input.
double log_sum_exp(std::span<const double> log_values);

/// a^(1-w) * b^w with the endpoint conventions used for EMDs:
/// w == 0 returns a, w == 1 returns b (so 0^0 never arises), a zero factor
/// with a positive exponent gives 0, and a == b returns a exactly.
double weighted_geometric(double a, double b, double w);

/// Logarithm of weighted_geometric, -inf where the product vanishes.
double log_weighted_geometric(double log_a, double log_b, double w);

/// Evenly spaced points on [lo, hi]; `count` == 1 yields {lo}.
std::vector<double> linspace(double lo, double hi, std::size_t count);

}  // namespace setfuse
