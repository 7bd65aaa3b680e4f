#include "setfuse/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "setfuse/error.hpp"

namespace setfuse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPoissonTailTolerance = 1e-9;
constexpr double kGridRenormLimit = 0.01;
constexpr double kGridNormTolerance = 1e-6;

double log_poisson_term(double lambda, std::size_t n) {
    if (lambda == 0.0) return n == 0 ? 0.0 : kNegInf;
    const double dn = static_cast<double>(n);
    return -lambda + dn * std::log(lambda) - std::lgamma(dn + 1.0);
}

// Mass of the Poisson series beyond n_max.
double poisson_tail(double lambda, std::size_t n_max) {
    if (lambda == 0.0) return 0.0;
    CompensatedSum tail;
    for (std::size_t n = n_max + 1;; ++n) {
        const double term = std::exp(log_poisson_term(lambda, n));
        tail.add(term);
        if (static_cast<double>(n) > lambda && term < 1e-20) break;
    }
    return tail.value();
}

}  // namespace

// ---------------------------------------------------------------------------
// CardinalityPmf
// ---------------------------------------------------------------------------

CardinalityPmf::CardinalityPmf(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InputError("cardinality pmf must have at least one entry");
    CompensatedSum total;
    for (double p : probs_) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw InputError("cardinality pmf entries must be finite and nonnegative");
        }
        total.add(p);
    }
    if (std::abs(total.value() - 1.0) > kSumTolerance) {
        throw InputError("cardinality pmf must sum to 1 (got " + std::to_string(total.value()) + ")");
    }
}

CardinalityPmf CardinalityPmf::normalized(std::vector<double> weights) {
    CompensatedSum total;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InputError("cardinality weights must be finite and nonnegative");
        }
        total.add(w);
    }
    if (!(total.value() > 0.0)) throw InputError("cardinality weights have zero total mass");
    const double scale = total.value();
    for (double& w : weights) w /= scale;
    return CardinalityPmf(std::move(weights));
}

CardinalityPmf CardinalityPmf::point_mass(std::size_t n) {
    std::vector<double> probs(n + 1, 0.0);
    probs[n] = 1.0;
    return CardinalityPmf(std::move(probs));
}

CardinalityPmf CardinalityPmf::bernoulli(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("existence probability must lie in [0, 1]");
    return CardinalityPmf({1.0 - alpha, alpha});
}

CardinalityPmf CardinalityPmf::binomial(std::size_t trials, double success) {
    if (!(success >= 0.0 && success <= 1.0)) throw InputError("binomial success probability must lie in [0, 1]");
    std::vector<double> probs(trials + 1, 0.0);
    const double k = static_cast<double>(trials);
    for (std::size_t n = 0; n <= trials; ++n) {
        const double dn = static_cast<double>(n);
        if (success == 0.0) {
            probs[n] = n == 0 ? 1.0 : 0.0;
        } else if (success == 1.0) {
            probs[n] = n == trials ? 1.0 : 0.0;
        } else {
            const double log_choose = std::lgamma(k + 1.0) - std::lgamma(dn + 1.0) - std::lgamma(k - dn + 1.0);
            probs[n] = std::exp(log_choose + dn * std::log(success) + (k - dn) * std::log1p(-success));
        }
    }
    return normalized(std::move(probs));
}

CardinalityPmf CardinalityPmf::poisson(double lambda, std::size_t n_max) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("Poisson rate must be finite and nonnegative");
    if (poisson_tail(lambda, n_max) > kPoissonTailTolerance) {
        throw InputError("truncation too aggressive: Poisson tail mass beyond n_max exceeds 1e-9");
    }
    std::vector<double> probs(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) probs[n] = std::exp(log_poisson_term(lambda, n));
    return normalized(std::move(probs));
}

double CardinalityPmf::mean() const {
    CompensatedSum acc;
    for (std::size_t n = 0; n < probs_.size(); ++n) acc.add(static_cast<double>(n) * probs_[n]);
    return acc.value();
}

std::size_t CardinalityPmf::map() const {
    return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

CardinalityPmf CardinalityPmf::padded(std::size_t n_max) const {
    if (n_max + 1 <= probs_.size()) return *this;
    std::vector<double> probs = probs_;
    probs.resize(n_max + 1, 0.0);
    return CardinalityPmf(std::move(probs));
}

double pmf_kld(const CardinalityPmf& p, const CardinalityPmf& q) {
    CompensatedSum acc;
    for (std::size_t n = 0; n < p.size(); ++n) {
        const double pn = p(n);
        if (pn == 0.0) continue;
        const double qn = q(n);
        if (qn == 0.0) return std::numeric_limits<double>::infinity();
        acc.add(pn * (std::log(pn) - std::log(qn)));
    }
    return std::max(0.0, acc.value());
}

// ---------------------------------------------------------------------------
// GaussianDensity
// ---------------------------------------------------------------------------

GaussianDensity::GaussianDensity(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    const auto d = mean_.size();
    if (d == 0) throw InputError("Gaussian density needs dimension >= 1");
    if (covariance_.rows() != d || covariance_.cols() != d) {
        throw InputError("covariance shape does not match mean dimension");
    }
    if (!mean_.allFinite() || !covariance_.allFinite()) throw InputError("Gaussian parameters must be finite");
    const double scale = covariance_.cwiseAbs().maxCoeff();
    if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InputError("covariance must be symmetric");
    }
    covariance_ = 0.5 * (covariance_ + covariance_.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance_, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) throw InputError("covariance must be positive definite");
    if (hi / lo > kMaxCondition) throw InputError("covariance condition number exceeds 1e12");

    Eigen::LLT<Matrix> llt(covariance_);
    if (llt.info() != Eigen::Success) throw InputError("covariance must be positive definite");
    lower_ = llt.matrixL();
    precision_ = llt.solve(Matrix::Identity(d, d));
    precision_ = 0.5 * (precision_ + precision_.transpose());
    log_det_ = 2.0 * lower_.diagonal().array().log().sum();
}

double GaussianDensity::log_evaluate(const Vector& x) const {
    if (x.size() != mean_.size()) throw InputError("point dimension does not match density");
    const Vector white = lower_.triangularView<Eigen::Lower>().solve(x - mean_);
    const double d = static_cast<double>(dim());
    return -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det_ + white.squaredNorm());
}

double GaussianDensity::evaluate(const Vector& x) const { return std::exp(log_evaluate(x)); }

Vector GaussianDensity::sample(Rng& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector white(mean_.size());
    for (Eigen::Index k = 0; k < white.size(); ++k) white[k] = normal(rng);
    return mean_ + lower_ * white;
}

bool GaussianDensity::operator==(const GaussianDensity& other) const {
    return mean_.size() == other.mean_.size() && mean_ == other.mean_ && covariance_ == other.covariance_;
}

// ---------------------------------------------------------------------------
// GridGeometry / GridDensity
// ---------------------------------------------------------------------------

std::size_t GridGeometry::cell_count() const {
    std::size_t count = 1;
    for (std::size_t n : shape) count *= n;
    return count;
}

double GridGeometry::cell_volume() const { return cell_size.prod(); }

Vector GridGeometry::cell_centre(std::size_t flat_index) const {
    Vector x(static_cast<Eigen::Index>(dim()));
    for (std::size_t a = dim(); a-- > 0;) {
        const std::size_t k = flat_index % shape[a];
        flat_index /= shape[a];
        const auto ai = static_cast<Eigen::Index>(a);
        x[ai] = origin[ai] + static_cast<double>(k) * cell_size[ai];
    }
    return x;
}

std::optional<std::size_t> GridGeometry::locate(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != dim()) throw InputError("point dimension does not match grid");
    std::size_t flat = 0;
    for (std::size_t a = 0; a < dim(); ++a) {
        const auto ai = static_cast<Eigen::Index>(a);
        const double u = (x[ai] - origin[ai]) / cell_size[ai] + 0.5;
        if (!(u >= 0.0) || u >= static_cast<double>(shape[a])) return std::nullopt;
        flat = flat * shape[a] + static_cast<std::size_t>(u);
    }
    return flat;
}

bool GridGeometry::aligned_with(const GridGeometry& other) const {
    if (shape != other.shape) return false;
    for (Eigen::Index a = 0; a < origin.size(); ++a) {
        const double tol = 1e-12 * std::max(1.0, cell_size[a] * static_cast<double>(shape[static_cast<std::size_t>(a)]));
        if (std::abs(origin[a] - other.origin[a]) > tol) return false;
        if (std::abs(cell_size[a] - other.cell_size[a]) > 1e-12 * cell_size[a]) return false;
    }
    return true;
}

GridGeometry GridGeometry::covering(std::span<const GaussianDensity> densities, std::size_t points_per_axis,
                                    double half_width_sigmas) {
    if (densities.empty()) throw InputError("grid covering needs at least one density");
    if (points_per_axis < 2) throw InputError("grid needs at least two points per axis");
    const auto d = static_cast<Eigen::Index>(densities.front().dim());
    Vector lo = Vector::Constant(d, std::numeric_limits<double>::infinity());
    Vector hi = Vector::Constant(d, -std::numeric_limits<double>::infinity());
    for (const auto& g : densities) {
        if (static_cast<Eigen::Index>(g.dim()) != d) throw InputError("grid covering needs equal dimensions");
        const Vector sd = g.covariance().diagonal().cwiseSqrt();
        lo = lo.cwiseMin(g.mean() - half_width_sigmas * sd);
        hi = hi.cwiseMax(g.mean() + half_width_sigmas * sd);
    }
    GridGeometry geom;
    geom.origin = lo;
    geom.cell_size = (hi - lo) / static_cast<double>(points_per_axis - 1);
    geom.shape.assign(static_cast<std::size_t>(d), points_per_axis);
    return geom;
}

GridDensity::GridDensity(GridGeometry geometry, std::vector<double> values)
    : geometry_(std::move(geometry)), values_(std::move(values)) {
    const std::size_t d = geometry_.dim();
    if (d == 0 || d > kMaxDim) throw InputError("grid densities support dimensions 1 to 3");
    if (static_cast<std::size_t>(geometry_.origin.size()) != d ||
        static_cast<std::size_t>(geometry_.cell_size.size()) != d) {
        throw InputError("grid origin/cell_size dimension mismatch");
    }
    for (std::size_t n : geometry_.shape) {
        if (n == 0) throw InputError("grid axes must be nonempty");
    }
    if (!(geometry_.cell_size.array() > 0.0).all()) throw InputError("grid cell sizes must be positive");
    if (values_.size() != geometry_.cell_count()) throw InputError("grid value count does not match shape");

    CompensatedSum total;
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("grid values must be finite and nonnegative");
        total.add(v);
    }
    const double mass = total.value() * geometry_.cell_volume();
    if (std::abs(mass - 1.0) > kGridRenormLimit) {
        throw InputError("grid density integrates to " + std::to_string(mass) + ", more than 1% away from 1");
    }
    if (mass != 1.0) {
        for (double& v : values_) v /= mass;
    }

    cumulative_.resize(values_.size());
    CompensatedSum running;
    for (std::size_t k = 0; k < values_.size(); ++k) {
        running.add(values_[k]);
        cumulative_[k] = running.value();
    }
    if (std::abs(integral() - 1.0) > kGridNormTolerance) throw InputError("grid density failed to normalise");
}

GridDensity GridDensity::discretize(const GaussianDensity& density, const GridGeometry& geometry) {
    if (density.dim() != geometry.dim()) throw InputError("grid and Gaussian dimensions differ");
    std::vector<double> values(geometry.cell_count());
    for (std::size_t k = 0; k < values.size(); ++k) values[k] = density.evaluate(geometry.cell_centre(k));
    return GridDensity(geometry, std::move(values));
}

double GridDensity::integral() const {
    CompensatedSum total;
    for (double v : values_) total.add(v);
    return total.value() * geometry_.cell_volume();
}

double GridDensity::evaluate(const Vector& x) const {
    const auto cell = geometry_.locate(x);
    return cell ? values_[*cell] : 0.0;
}

double GridDensity::log_evaluate(const Vector& x) const {
    const double v = evaluate(x);
    return v > 0.0 ? std::log(v) : kNegInf;
}

Vector GridDensity::sample(Rng& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double target = unit(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) --it;
    const auto flat = static_cast<std::size_t>(it - cumulative_.begin());
    Vector x = geometry_.cell_centre(flat);
    for (Eigen::Index a = 0; a < x.size(); ++a) x[a] += (unit(rng) - 0.5) * geometry_.cell_size[a];
    return x;
}

bool GridDensity::operator==(const GridDensity& other) const {
    return geometry_.shape == other.geometry_.shape && geometry_.origin == other.geometry_.origin &&
           geometry_.cell_size == other.geometry_.cell_size && values_ == other.values_;
}

// ---------------------------------------------------------------------------
// LocalisationDensity
// ---------------------------------------------------------------------------

LocalisationDensity::LocalisationDensity(GaussianDensity density) : density_(std::move(density)) {}
LocalisationDensity::LocalisationDensity(GridDensity density) : density_(std::move(density)) {}

std::size_t LocalisationDensity::dim() const {
    return std::visit([](const auto& d) { return d.dim(); }, density_);
}

double LocalisationDensity::evaluate(const Vector& x) const {
    return std::visit([&](const auto& d) { return d.evaluate(x); }, density_);
}

double LocalisationDensity::log_evaluate(const Vector& x) const {
    return std::visit([&](const auto& d) { return d.log_evaluate(x); }, density_);
}

Vector LocalisationDensity::sample(Rng& rng) const {
    return std::visit([&](const auto& d) { return d.sample(rng); }, density_);
}

const GaussianDensity& LocalisationDensity::gaussian() const {
    if (!is_gaussian()) throw InputError("localisation density is not Gaussian");
    return std::get<GaussianDensity>(density_);
}

const GridDensity& LocalisationDensity::grid() const {
    if (!is_grid()) throw InputError("localisation density is not a grid");
    return std::get<GridDensity>(density_);
}

// ---------------------------------------------------------------------------
// Finite sets and distributions
// ---------------------------------------------------------------------------

FiniteSet::FiniteSet(std::vector<Vector> points) : points_(std::move(points)) {
    for (const auto& p : points_) {
        if (p.size() != points_.front().size()) throw InputError("finite set points must share a dimension");
    }
}

Bernoulli::Bernoulli(double alpha, LocalisationDensity loc) : alpha_(alpha), loc_(std::move(loc)) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("existence probability must lie in [0, 1]");
}

Poisson::Poisson(double lambda, LocalisationDensity loc) : lambda_(lambda), loc_(std::move(loc)) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("Poisson rate must be finite and nonnegative");
}

IidCluster::IidCluster(CardinalityPmf card, LocalisationDensity loc) : card_(std::move(card)), loc_(std::move(loc)) {}

const LocalisationDensity& localisation_of(const FiniteSetDistribution& f) {
    return std::visit([](const auto& d) -> const LocalisationDensity& { return d.loc(); }, f);
}

std::string_view family_name(const FiniteSetDistribution& f) {
    switch (f.index()) {
        case 0: return "bernoulli";
        case 1: return "poisson";
        default: return "iid";
    }
}

std::size_t default_poisson_n_max(double lambda) {
    const double bound = std::ceil(lambda + 10.0 * std::sqrt(lambda));
    return std::max<std::size_t>(30, static_cast<std::size_t>(bound));
}

CardinalityPmf cardinality_of(const FiniteSetDistribution& f, std::size_t n_max) {
    if (n_max < 1) throw InputError("n_max must be at least 1");
    if (const auto* b = std::get_if<Bernoulli>(&f)) return CardinalityPmf::bernoulli(b->alpha()).padded(n_max);
    if (const auto* p = std::get_if<Poisson>(&f)) return CardinalityPmf::poisson(p->lambda(), n_max);
    return std::get<IidCluster>(f).card().padded(n_max);
}

CardinalityPmf cardinality_of(const FiniteSetDistribution& f) {
    if (std::holds_alternative<Bernoulli>(f)) return cardinality_of(f, 1);
    if (const auto* p = std::get_if<Poisson>(&f)) return cardinality_of(f, default_poisson_n_max(p->lambda()));
    const auto& card = std::get<IidCluster>(f).card();
    return cardinality_of(f, std::max<std::size_t>(1, card.n_max()));
}

double rfs_log_density_eval(const FiniteSetDistribution& f, const FiniteSet& X) {
    const auto& loc = localisation_of(f);
    const std::size_t n = X.size();
    for (const auto& x : X.points()) {
        if (static_cast<std::size_t>(x.size()) != loc.dim()) throw InputError("point dimension does not match density");
    }

    double log_card_times_factorial = kNegInf;
    if (const auto* b = std::get_if<Bernoulli>(&f)) {
        if (n == 0) log_card_times_factorial = std::log(1.0 - b->alpha());
        else if (n == 1) log_card_times_factorial = std::log(b->alpha());
    } else if (const auto* p = std::get_if<Poisson>(&f)) {
        // p(n) n! = exp(-lambda) lambda^n
        const double lambda = p->lambda();
        if (lambda == 0.0) log_card_times_factorial = n == 0 ? 0.0 : kNegInf;
        else log_card_times_factorial = -lambda + static_cast<double>(n) * std::log(lambda);
    } else {
        const double pn = std::get<IidCluster>(f).card()(n);
        if (pn > 0.0) log_card_times_factorial = std::log(pn) + std::lgamma(static_cast<double>(n) + 1.0);
    }
    if (log_card_times_factorial == kNegInf) return kNegInf;

    // Summing sorted terms makes the result independent of point order.
    std::vector<double> terms;
    terms.reserve(n);
    for (const auto& x : X.points()) terms.push_back(loc.log_evaluate(x));
    std::sort(terms.begin(), terms.end());
    double total = log_card_times_factorial;
    for (double t : terms) total += t;
    return total;
}

double rfs_density_eval(const FiniteSetDistribution& f, const FiniteSet& X) {
    return std::exp(rfs_log_density_eval(f, X));
}

double validate_normalization(const FiniteSetDistribution& f, std::size_t n_max) {
    const auto& loc = localisation_of(f);
    const double loc_mass = loc.is_grid() ? loc.grid().integral() : 1.0;

    if (const auto* b = std::get_if<Bernoulli>(&f)) {
        return (1.0 - b->alpha()) + b->alpha() * loc_mass;
    }
    CompensatedSum total;
    if (const auto* p = std::get_if<Poisson>(&f)) {
        for (std::size_t n = 0; n <= n_max; ++n) {
            total.add(std::exp(log_poisson_term(p->lambda(), n)) * std::pow(loc_mass, static_cast<double>(n)));
        }
        return total.value();
    }
    const auto& card = std::get<IidCluster>(f).card();
    for (std::size_t n = 0; n <= std::min(n_max, card.n_max()); ++n) {
        total.add(card(n) * std::pow(loc_mass, static_cast<double>(n)));
    }
    return total.value();
}

}  // namespace setfuse
