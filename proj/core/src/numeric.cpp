#include "setfuse/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace setfuse {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void CompensatedSum::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        compensation_ += (sum_ - t) + x;
    } else {
        compensation_ += (x - t) + sum_;
    }
    sum_ = t;
}

double log_sum_exp(std::span<const double> log_values) {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    double peak = neg_inf;
    for (double v : log_values) peak = std::max(peak, v);
    if (peak == neg_inf) return neg_inf;
    CompensatedSum acc;
    for (double v : log_values) {
        if (v != neg_inf) acc.add(std::exp(v - peak));
    }
    return peak + std::log(acc.value());
}

double weighted_geometric(double a, double b, double w) {
    if (w == 0.0 || a == b) return a;
    if (w == 1.0) return b;
    if (a == 0.0 || b == 0.0) return 0.0;
    return std::exp((1.0 - w) * std::log(a) + w * std::log(b));
}

double log_weighted_geometric(double log_a, double log_b, double w) {
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (w == 0.0 || log_a == log_b) return log_a;
    if (w == 1.0) return log_b;
    if (log_a == neg_inf || log_b == neg_inf) return neg_inf;
    return (1.0 - w) * log_a + w * log_b;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    std::vector<double> out;
    if (count == 0) return out;
    out.reserve(count);
    if (count == 1) {
        out.push_back(lo);
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(i + 1 == count ? hi : lo + step * static_cast<double>(i));
    }
    return out;
}

}  // namespace setfuse
