#include "setfuse/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "setfuse/diagnostics.hpp"
#include "setfuse/emd_fusion.hpp"
#include "setfuse/error.hpp"
#include "setfuse/gaussian_ops.hpp"

namespace setfuse {

namespace {

std::string num(double value, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

class Summary {
public:
    explicit Summary(ReproduceReport& report) : report_(report) {}

    void info(const std::string& line) { report_.summary.push_back(line); }

    void check(const std::string& label, bool ok, const std::string& detail) {
        report_.summary.push_back(label + ": " + detail + (ok ? "  PASS" : "  FAIL"));
        report_.passed = report_.passed && ok;
    }

    void near(const std::string& label, double value, double expected, double tol) {
        check(label, std::abs(value - expected) <= tol,
              num(value) + " (expected " + num(expected) + " +- " + num(tol) + ")");
    }

private:
    ReproduceReport& report_;
};

// Grid view of a sweep table: value(column)[axis][omega].
struct SweepGrid {
    std::size_t axis_count;
    std::size_t omega_count;
    const CsvTable& table;

    double at(std::size_t a, std::size_t w, std::size_t column) const {
        return std::stod(table.rows[a * omega_count + w][column]);
    }
};

std::size_t column_of(const CsvTable& table, std::string_view name) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw SolverError("missing sweep column " + std::string(name));
    return static_cast<std::size_t>(it - table.header.begin());
}

void reproduce_ex1(const std::filesystem::path& out, std::size_t jobs, Summary& summary) {
    const Scenario scenario = gauss_bernoulli_scenario();
    const CsvTable table = sweep_scenario(scenario, jobs);
    table.write(out / "ex1_scale_and_existence.csv");

    const auto kappas = scenario.sweep->kappa->values();
    const auto omegas = scenario.sweep->omega.values();
    const SweepGrid grid{kappas.size(), omegas.size(), table};
    const std::size_t z_col = column_of(table, "z_omega");
    const std::size_t a_col = column_of(table, "alpha_omega");

    double max_z = 0.0;
    double max_alpha = 0.0;
    double min_alpha = 1.0;
    double max_rise = -std::numeric_limits<double>::infinity();
    std::size_t flagged = 0;
    for (std::size_t a = 0; a < kappas.size(); ++a) {
        for (std::size_t w = 1; w + 1 < omegas.size(); ++w) {
            const double z = grid.at(a, w, z_col);
            const double alpha = grid.at(a, w, a_col);
            max_z = std::max(max_z, z);
            max_alpha = std::max(max_alpha, alpha);
            min_alpha = std::min(min_alpha, alpha);
            if (alpha < 0.8) ++flagged;
            if (a > 0) max_rise = std::max(max_rise, z - grid.at(a - 1, w, z_col));
        }
    }
    summary.info("ex1 Gauss-Bernoulli sweep: " + std::to_string(kappas.size()) + " kappa x " +
                 std::to_string(omegas.size()) + " omega cells, major-axis variance 1");
    summary.check("ex1 z_omega < 1 at interior cells", max_z < 1.0, "max " + num(max_z, 9));
    summary.check("ex1 z_omega nonincreasing in kappa", max_rise <= 1e-9, "largest rise " + num(max_rise, 3));
    summary.check("ex1 alpha_omega < 0.8 at interior cells", max_alpha < 0.8, "max " + num(max_alpha, 9));
    summary.check("ex1 min alpha_omega < 0.5", min_alpha < 0.5, "min " + num(min_alpha));
    summary.info("ex1 interior cells with inconsistent cardinality: " + std::to_string(flagged));
}

void write_pmfs(const std::filesystem::path& path, const CardinalityPmf& p_i, const CardinalityPmf& p_j) {
    CsvTable table{{"n", "p_i", "p_j"}, {}};
    for (std::size_t n = 0; n < std::max(p_i.size(), p_j.size()); ++n) {
        table.rows.push_back({std::to_string(n), format_number(p_i(n)), format_number(p_j(n))});
    }
    table.write(path);
}

void reproduce_ex2(const std::filesystem::path& out, std::size_t jobs, Summary& summary) {
    struct Case {
        std::string tag;
        std::size_t trials;
        double success_i;
        double success_j;
    };
    const Case cases[] = {{"k5", 5, 0.95, 0.92}, {"k35", 35, 0.98, 0.975}};
    for (const auto& c : cases) {
        const Scenario scenario = binomial_iid_scenario(c.trials, c.success_i, c.success_j);
        const auto& p_i = std::get<IidCluster>(scenario.inputs[0]).card();
        const auto& p_j = std::get<IidCluster>(scenario.inputs[1]).card();
        write_pmfs(out / ("ex2_" + c.tag + "_inputs.csv"), p_i, p_j);

        const CsvTable table = sweep_scenario(scenario, jobs);
        table.write(out / ("ex2_" + c.tag + "_map.csv"));

        CsvTable fused{{"omega", "z", "n", "p_fused"}, {}};
        for (const double omega : {0.25, 0.5, 0.75}) {
            for (const double z : {0.1, 0.5, 0.9}) {
                const auto f = fused_cardinality_p2(p_i, p_j, geometric_scale_sequence(z, p_i.n_max()), omega);
                for (std::size_t n = 0; n < f.pmf.size(); ++n) {
                    fused.rows.push_back({format_number(omega), format_number(z), std::to_string(n),
                                          format_number(f.pmf(n))});
                }
            }
        }
        fused.write(out / ("ex2_" + c.tag + "_fused.csv"));

        CsvTable thresholds{{"omega", "z", "iid_bound", "eta"}, {}};
        for (const double z : linspace(0.1, 0.9, 9)) {
            for (std::size_t k = 1; k < 100; ++k) {
                const double omega = static_cast<double>(k) / 100.0;
                thresholds.rows.push_back({format_number(omega), format_number(z),
                                           format_number(iid_bound(p_i, p_j, omega, c.trials, z)),
                                           format_number(iid_threshold_eta(p_i, p_j, omega, z))});
            }
        }
        thresholds.write(out / ("ex2_" + c.tag + "_thresholds.csv"));

        const std::size_t map_col = column_of(table, "map_n");
        const std::size_t flag_col = column_of(table, "inconsistent_flag");
        std::size_t wrong_map = 0;
        std::size_t inconsistent = 0;
        for (const auto& row : table.rows) {
            if (std::stoul(row[map_col]) != c.trials) ++wrong_map;
            if (row[flag_col] == "1") ++inconsistent;
        }
        const std::string pair = "B(" + std::to_string(c.trials) + "," + num(c.success_i) + ") vs B(" +
                                 std::to_string(c.trials) + "," + num(c.success_j) + ")";
        summary.check("ex2 " + pair + " input MAP", p_i.map() == c.trials && p_j.map() == c.trials,
                      std::to_string(p_i.map()) + ", " + std::to_string(p_j.map()));
        summary.info("ex2 " + pair + ": " + std::to_string(inconsistent) + " of " + std::to_string(table.rows.size()) +
                     " (z, omega) cells inconsistent, " + std::to_string(wrong_map) + " with a biased MAP");
    }
}

void reproduce_ex3(const std::filesystem::path& out, std::uint64_t seed, Summary& summary) {
    const Scenario scenario = gauss_bernoulli_scenario();
    NewtonConfig config = scenario.solver;
    config.seed = seed;
    const auto kappas = scenario.sweep->kappa->values();
    const auto curve = gauss_bernoulli_weight_curve(kappas, *scenario.sweep, config);

    CsvTable table{{"kappa", "omega_loc", "z_omega", "iterations", "omega_card", "alpha_fused"}, {}};
    CsvTable fused{{"kappa", "omega", "mean_x", "mean_y", "cov_xx", "cov_xy", "cov_yy"}, {}};
    double sum_iters = 0.0;
    std::size_t max_iters = 0;
    double max_alpha_dev = 0.0;
    double max_card_dev = 0.0;
    for (const auto& point : curve) {
        const auto& r = point.result;
        const std::size_t iters = r.loc_trace->iterations;
        const double alpha = std::get<Bernoulli>(r.fused).alpha();
        sum_iters += static_cast<double>(iters);
        max_iters = std::max(max_iters, iters);
        max_alpha_dev = std::max(max_alpha_dev, std::abs(alpha - 0.8));
        max_card_dev = std::max(max_card_dev, std::abs(r.omega_card - 0.5));
        table.rows.push_back({format_number(point.kappa), format_number(r.omega_loc.front()),
                              format_number(r.z_values.front()), std::to_string(iters),
                              format_number(r.omega_card), format_number(alpha)});
        if (point.kappa == 1.0 || point.kappa == 10.0 || point.kappa == 20.0) {
            const auto& g = std::get<Bernoulli>(r.fused).loc().gaussian();
            fused.rows.push_back({format_number(point.kappa), format_number(r.omega_loc.front()),
                                  format_number(g.mean()(0)), format_number(g.mean()(1)),
                                  format_number(g.covariance()(0, 0)), format_number(g.covariance()(0, 1)),
                                  format_number(g.covariance()(1, 1))});
        }
    }
    table.write(out / "ex3_optimal_weights.csv");
    fused.write(out / "ex3_fused_gaussians.csv");

    auto weight_at = [&](double kappa) {
        for (const auto& point : curve) {
            if (point.kappa == kappa) return point.result.omega_loc.front();
        }
        throw SolverError("kappa " + num(kappa) + " is not on the sweep grid");
    };
    const double w1 = weight_at(1.0);
    const double w10 = weight_at(10.0);
    const double w20 = weight_at(20.0);
    summary.info("ex3 Newton weights with " + std::to_string(config.mc_samples) + " Monte-Carlo samples, epsilon " +
                 num(config.epsilon) + ", major-axis variance 1");
    summary.near("ex3 omega*(kappa=1)", w1, 0.5, 1e-3);
    summary.near("ex3 omega*(kappa=10)", w10, 0.397, 0.05);
    summary.near("ex3 omega*(kappa=20)", w20, 0.387, 0.05);
    summary.check("ex3 omega* decreasing over kappa 1, 10, 20", w1 > w10 && w10 > w20,
                  num(w1) + " > " + num(w10) + " > " + num(w20));
    summary.check("ex3 iterations per run <= 10", max_iters <= 10,
                  "mean " + num(sum_iters / static_cast<double>(curve.size()), 3) + ", max " +
                      std::to_string(max_iters));
    summary.check("ex3 fused existence stays 0.8 with omega_card 0.5", max_alpha_dev <= 1e-9 && max_card_dev <= 1e-9,
                  "max deviations " + num(max_alpha_dev, 3) + ", " + num(max_card_dev, 3));

    SweepSpec det_sweep = *scenario.sweep;
    det_sweep.det_sigma = 0.01;
    const auto det_curve = gauss_bernoulli_weight_curve({1.0, 10.0, 20.0}, det_sweep, config);
    summary.info("ex3 with det(Sigma) = 0.01 instead: omega* = " + num(det_curve[0].result.omega_loc.front()) + ", " +
                 num(det_curve[1].result.omega_loc.front()) + ", " + num(det_curve[2].result.omega_loc.front()) +
                 " at kappa = 1, 10, 20");
}

void reproduce_ex4(const std::filesystem::path& out, std::uint64_t seed, Summary& summary) {
    struct Case {
        std::string tag;
        std::size_t trials;
        double success_i;
        double success_j;
        double expected;
    };
    const Case cases[] = {{"k5", 5, 0.95, 0.92, 0.5182}, {"k35", 35, 0.98, 0.975, 0.5090}};
    NewtonConfig config;
    config.seed = seed;

    CsvTable trace{{"case", "iteration", "omega", "objective", "dN", "d2N", "bisection"}, {}};
    CsvTable fused{{"case", "n", "p_i", "p_j", "p_fused"}, {}};
    for (const auto& c : cases) {
        const auto p_i = CardinalityPmf::binomial(c.trials, c.success_i);
        const auto p_j = CardinalityPmf::binomial(c.trials, c.success_j);
        const auto solution = newton_cardinality(p_i, p_j, config);
        for (std::size_t k = 0; k < solution.trace.steps.size(); ++k) {
            const auto& s = solution.trace.steps[k];
            trace.rows.push_back({c.tag, std::to_string(k), format_number(s.omega), format_number(s.objective),
                                  format_number(s.dz), format_number(s.d2z), s.bisection ? "1" : "0"});
        }
        for (std::size_t n = 0; n <= c.trials; ++n) {
            fused.rows.push_back({c.tag, std::to_string(n), format_number(p_i(n)), format_number(p_j(n)),
                                  format_number(solution.fused(n))});
        }
        const std::string pair = "B(" + std::to_string(c.trials) + "," + num(c.success_i) + ") vs B(" +
                                 std::to_string(c.trials) + "," + num(c.success_j) + ")";
        summary.near("ex4 " + pair + " omega*", solution.omega, c.expected, 1e-3);
        summary.check("ex4 " + pair + " iterations <= 5", solution.trace.iterations <= 5,
                      std::to_string(solution.trace.iterations));
        summary.check("ex4 " + pair + " fused pmf consistent",
                      !any_cardinality_inconsistency(solution.fused, p_i, p_j), "no n below both inputs");
    }
    trace.write(out / "ex4_newton_trace.csv");
    fused.write(out / "ex4_fused_cardinality.csv");
}

}  // namespace

Scenario gauss_bernoulli_scenario() {
    SweepSpec sweep;
    sweep.kappa = RangeSpec{1.0, 40.0, 79};
    sweep.omega = RangeSpec{0.0, 1.0, 101};
    sweep.major_variance = 1.0;
    sweep.phi = {std::numbers::pi / 4.0, -std::numbers::pi / 4.0};

    Vector m_i(2);
    m_i << 0.25, 0.25;
    Vector m_j(2);
    m_j << -0.75, -0.25;
    Scenario scenario(Bernoulli(0.8, GaussianDensity(m_i, sweep.covariance(1.0, 0))),
                      Bernoulli(0.8, GaussianDensity(m_j, sweep.covariance(1.0, 1))));
    scenario.sweep = sweep;
    return scenario;
}

Scenario binomial_iid_scenario(std::size_t trials, double success_i, double success_j) {
    const GaussianDensity loc(Vector::Zero(2), Matrix::Identity(2, 2));
    Scenario scenario(IidCluster(CardinalityPmf::binomial(trials, success_i), loc),
                      IidCluster(CardinalityPmf::binomial(trials, success_j), loc));
    SweepSpec sweep;
    sweep.z = RangeSpec{0.05, 1.0, 20};
    sweep.omega = RangeSpec{0.0, 1.0, 101};
    scenario.sweep = sweep;
    return scenario;
}

std::vector<WeightCurvePoint> gauss_bernoulli_weight_curve(const std::vector<double>& kappas, const SweepSpec& sweep,
                                                           const NewtonConfig& config) {
    const Scenario base = gauss_bernoulli_scenario();
    std::vector<WeightCurvePoint> curve;
    curve.reserve(kappas.size());
    for (std::size_t k = 0; k < kappas.size(); ++k) {
        std::array<FiniteSetDistribution, 2> inputs = base.inputs;
        for (std::size_t s = 0; s < 2; ++s) {
            const auto& mean = localisation_of(base.inputs[s]).gaussian().mean();
            inputs[s] = with_localisation(inputs[s], GaussianDensity(mean, sweep.covariance(kappas[k], s)));
        }
        NewtonConfig cell = config;
        cell.seed = derive_seed(config.seed, k);
        curve.push_back({kappas[k], consistent_fuse(inputs[0], inputs[1], cell)});
    }
    return curve;
}

ReproduceReport reproduce(std::string_view example_id, const std::filesystem::path& out_dir, std::uint64_t seed,
                          std::size_t jobs) {
    ReproduceReport report;
    Summary summary(report);
    std::filesystem::create_directories(out_dir);
    if (example_id == "ex1") reproduce_ex1(out_dir, jobs, summary);
    else if (example_id == "ex2") reproduce_ex2(out_dir, jobs, summary);
    else if (example_id == "ex3") reproduce_ex3(out_dir, seed, summary);
    else if (example_id == "ex4") reproduce_ex4(out_dir, seed, summary);
    else throw InputError("unknown example '" + std::string(example_id) + "' (expected ex1, ex2, ex3 or ex4)");

    std::ofstream out(out_dir / "summary.txt", std::ios::binary);
    if (!out) throw InputError("cannot write " + (out_dir / "summary.txt").string());
    for (const auto& line : report.summary) out << line << '\n';
    out << (report.passed ? "all checks passed" : "some checks failed") << '\n';
    return report;
}

}  // namespace setfuse
