#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "setfuse/numeric.hpp"

namespace setfuse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Cardinality distributions
// ---------------------------------------------------------------------------

/// Probability mass function over object counts n = 0..n_max.
/// Entries are nonnegative and sum to one within kSumTolerance. Counts past
/// n_max have probability zero.
class CardinalityPmf {
public:
    static constexpr double kSumTolerance = 1e-10;

    explicit CardinalityPmf(std::vector<double> probs);

    /// Scales nonnegative weights to unit mass. Throws if the total is zero.
    static CardinalityPmf normalized(std::vector<double> weights);
    static CardinalityPmf point_mass(std::size_t n);
    static CardinalityPmf bernoulli(double alpha);
    static CardinalityPmf binomial(std::size_t trials, double success);
    /// Poisson pmf truncated at n_max and renormalised. Throws InputError
    /// ("truncation too aggressive") when the discarded tail exceeds 1e-9.
    static CardinalityPmf poisson(double lambda, std::size_t n_max);

    std::size_t n_max() const { return probs_.size() - 1; }
    std::size_t size() const { return probs_.size(); }
    double operator()(std::size_t n) const { return n < probs_.size() ? probs_[n] : 0.0; }
    std::span<const double> probs() const { return probs_; }

    double mean() const;
    /// Smallest n attaining the maximum probability.
    std::size_t map() const;
    CardinalityPmf padded(std::size_t n_max) const;

    bool operator==(const CardinalityPmf&) const = default;

private:
    std::vector<double> probs_;
};

/// D(p || q) in nats; +inf when p puts mass where q has none.
double pmf_kld(const CardinalityPmf& p, const CardinalityPmf& q);

// ---------------------------------------------------------------------------
// Single-object (localisation) densities
// ---------------------------------------------------------------------------

/// Multivariate normal N(mean, covariance) with cached factorisation.
class GaussianDensity {
public:
    /// Largest accepted covariance condition number.
    static constexpr double kMaxCondition = 1e12;

    GaussianDensity(Vector mean, Matrix covariance);

    std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
    const Vector& mean() const { return mean_; }
    const Matrix& covariance() const { return covariance_; }
    const Matrix& precision() const { return precision_; }
    /// Lower Cholesky factor L with L L^T = covariance.
    const Matrix& cholesky_lower() const { return lower_; }
    double log_det() const { return log_det_; }

    double log_evaluate(const Vector& x) const;
    double evaluate(const Vector& x) const;
    Vector sample(Rng& rng) const;

    bool operator==(const GaussianDensity& other) const;

private:
    Vector mean_;
    Matrix covariance_;
    Matrix precision_;
    Matrix lower_;
    double log_det_ = 0.0;
};

/// Axis-aligned lattice of cell centres. Cell k along an axis is centred at
/// origin + k * cell_size; values are taken at the centres (midpoint rule).
/// Flat indexing is row-major (last axis fastest).
struct GridGeometry {
    Vector origin;
    Vector cell_size;
    std::vector<std::size_t> shape;

    std::size_t dim() const { return shape.size(); }
    std::size_t cell_count() const;
    double cell_volume() const;
    Vector cell_centre(std::size_t flat_index) const;
    /// Cell containing x, or nullopt outside the lattice.
    std::optional<std::size_t> locate(const Vector& x) const;
    bool aligned_with(const GridGeometry& other) const;

    /// A lattice covering +-half_width_sigmas standard deviations of every
    /// density along each axis.
    static GridGeometry covering(std::span<const GaussianDensity> densities,
                                 std::size_t points_per_axis = 201,
                                 double half_width_sigmas = 6.0);
};

/// Nonnegative values on a GridGeometry integrating to one (midpoint rule).
/// Inputs whose integral is within 1% of one are renormalised; anything
/// further off is rejected.
class GridDensity {
public:
    static constexpr std::size_t kMaxDim = 3;

    GridDensity(GridGeometry geometry, std::vector<double> values);

    static GridDensity discretize(const GaussianDensity& density, const GridGeometry& geometry);

    const GridGeometry& geometry() const { return geometry_; }
    std::span<const double> values() const { return values_; }
    std::size_t dim() const { return geometry_.dim(); }
    double integral() const;

    double evaluate(const Vector& x) const;
    double log_evaluate(const Vector& x) const;
    /// Picks a cell proportionally to its mass, then a uniform point in it.
    Vector sample(Rng& rng) const;

    bool operator==(const GridDensity& other) const;

private:
    GridGeometry geometry_;
    std::vector<double> values_;
    std::vector<double> cumulative_;
};

/// Either a Gaussian or a grid density over R^d.
class LocalisationDensity {
public:
    LocalisationDensity(GaussianDensity density);  // NOLINT(google-explicit-constructor)
    LocalisationDensity(GridDensity density);      // NOLINT(google-explicit-constructor)

    std::size_t dim() const;
    double evaluate(const Vector& x) const;
    double log_evaluate(const Vector& x) const;
    Vector sample(Rng& rng) const;

    bool is_gaussian() const { return std::holds_alternative<GaussianDensity>(density_); }
    bool is_grid() const { return std::holds_alternative<GridDensity>(density_); }
    const GaussianDensity& gaussian() const;
    const GridDensity& grid() const;

    bool operator==(const LocalisationDensity& other) const { return density_ == other.density_; }

private:
    std::variant<GaussianDensity, GridDensity> density_;
};

// ---------------------------------------------------------------------------
// Finite sets and finite-set distributions
// ---------------------------------------------------------------------------

/// Unordered collection of equal-dimension points (insertion order kept).
class FiniteSet {
public:
    FiniteSet() = default;
    explicit FiniteSet(std::vector<Vector> points);

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    std::span<const Vector> points() const { return points_; }

private:
    std::vector<Vector> points_;
};

class Bernoulli {
public:
    Bernoulli(double alpha, LocalisationDensity loc);
    double alpha() const { return alpha_; }
    const LocalisationDensity& loc() const { return loc_; }
    bool operator==(const Bernoulli&) const = default;

private:
    double alpha_;
    LocalisationDensity loc_;
};

class Poisson {
public:
    Poisson(double lambda, LocalisationDensity loc);
    double lambda() const { return lambda_; }
    const LocalisationDensity& loc() const { return loc_; }
    bool operator==(const Poisson&) const = default;

private:
    double lambda_;
    LocalisationDensity loc_;
};

class IidCluster {
public:
    IidCluster(CardinalityPmf card, LocalisationDensity loc);
    const CardinalityPmf& card() const { return card_; }
    const LocalisationDensity& loc() const { return loc_; }
    bool operator==(const IidCluster&) const = default;

private:
    CardinalityPmf card_;
    LocalisationDensity loc_;
};

using FiniteSetDistribution = std::variant<Bernoulli, Poisson, IidCluster>;

const LocalisationDensity& localisation_of(const FiniteSetDistribution& f);
std::string_view family_name(const FiniteSetDistribution& f);

/// max(30, ceil(lambda + 10 sqrt(lambda))).
std::size_t default_poisson_n_max(double lambda);

/// Explicit cardinality pmf over 0..n_max (n_max >= 1). Poisson pmfs are
/// truncated and renormalised; IID cluster pmfs are zero-padded.
CardinalityPmf cardinality_of(const FiniteSetDistribution& f, std::size_t n_max);
/// Same, with n_max chosen per family (1, default_poisson_n_max, stored).
CardinalityPmf cardinality_of(const FiniteSetDistribution& f);

/// f(X) = p(|X|) |X|! prod rho(x). Invariant under reordering of X.
double rfs_density_eval(const FiniteSetDistribution& f, const FiniteSet& X);
double rfs_log_density_eval(const FiniteSetDistribution& f, const FiniteSet& X);

/// Set integral of f, summed over cardinalities 0..n_max. Each localisation
/// factor contributes its own integral (exactly 1 for Gaussians, the
/// midpoint sum for grids). Poisson terms use the untruncated series.
double validate_normalization(const FiniteSetDistribution& f, std::size_t n_max);

}  // namespace setfuse
