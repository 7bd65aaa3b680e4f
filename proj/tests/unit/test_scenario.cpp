#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "setfuse/error.hpp"
#include "setfuse/scenario.hpp"

using namespace setfuse;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = SETFUSE_SCENARIO_DIR;

std::string minimal_bernoulli(const std::string& extra = "") {
    return R"({"version": 1, "family": "bernoulli", "inputs": [
        {"alpha": 0.8, "localisation": {"type": "gaussian", "mean": [0.25, 0.25], "covariance": [[1, 0], [0, 1]]}},
        {"alpha": 0.6, "localisation": {"type": "gaussian", "mean": [-0.75, -0.25], "covariance": [[1, 0], [0, 1]]}}
    ])" + extra + "}";
}

std::size_t column(const CsvTable& t, const std::string& name) {
    for (std::size_t k = 0; k < t.header.size(); ++k) {
        if (t.header[k] == name) return k;
    }
    throw std::runtime_error("missing column " + name);
}

double cell(const CsvTable& t, std::size_t row, const std::string& name) {
    return std::stod(t.rows.at(row).at(column(t, name)));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("setfuse_scenario_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST(ParseScenario, Minimal) {
    const auto s = parse_scenario(minimal_bernoulli());
    EXPECT_EQ(s.family(), "bernoulli");
    EXPECT_EQ(std::get<Bernoulli>(s.inputs[1]).alpha(), 0.6);
    EXPECT_EQ(s.omega, 0.5);
    EXPECT_FALSE(s.sweep.has_value());
    EXPECT_EQ(s.solver.seed, NewtonConfig{}.seed);
}

TEST(ParseScenario, RejectsUnknownFields) {
    EXPECT_THROW(parse_scenario(minimal_bernoulli(R"(, "colour": "red")")), InputError);
    EXPECT_THROW(parse_scenario(minimal_bernoulli(R"(, "solver": {"tolerance": 1e-3})")), InputError);
    EXPECT_THROW(parse_scenario(minimal_bernoulli(R"(, "sweep": {"kappa": [1, 2, 2], "step": 3})")), InputError);
    const std::string bad_input = R"({"version": 1, "family": "poisson", "inputs": [
        {"lambda": 1, "rate": 2, "localisation": {"type": "gaussian", "mean": [0], "covariance": [[1]]}},
        {"lambda": 1, "localisation": {"type": "gaussian", "mean": [0], "covariance": [[1]]}}]})";
    EXPECT_THROW(parse_scenario(bad_input), InputError);
}

TEST(ParseScenario, RejectsBadValues) {
    EXPECT_THROW(parse_scenario("{"), InputError);
    EXPECT_THROW(parse_scenario("[]"), InputError);
    std::string v2 = minimal_bernoulli();
    v2.replace(v2.find("\"version\": 1"), 12, "\"version\": 2");
    EXPECT_THROW(parse_scenario(v2), InputError);
    EXPECT_THROW(parse_scenario(minimal_bernoulli(R"(, "omega": 1.5)")), InputError);
    EXPECT_THROW(parse_scenario(minimal_bernoulli(R"(, "sweep": {"kappa": [1, 2, 2], "z": [0, 1, 2]})")), InputError);
    EXPECT_THROW(parse_scenario(minimal_bernoulli(R"(, "solver": {"epsilon": -1})")), InputError);
    std::string bad_cov = minimal_bernoulli();
    bad_cov.replace(bad_cov.find("[[1, 0], [0, 1]]"), 16, "[[1, 2], [2, 1]]");
    EXPECT_THROW(parse_scenario(bad_cov), InputError);
    std::string bad_alpha = minimal_bernoulli();
    bad_alpha.replace(bad_alpha.find("0.8"), 3, "1.8");
    EXPECT_THROW(parse_scenario(bad_alpha), InputError);
}

TEST(ParseScenario, CardinalityForms) {
    const auto s = load_scenario(kScenarios / "binomial_iid.json");
    EXPECT_EQ(s.family(), "iid");
    const auto& c = std::get<IidCluster>(s.inputs[0]).card();
    EXPECT_EQ(c.n_max(), 5u);
    EXPECT_NEAR(c(5), std::pow(0.95, 5), 1e-12);
    ASSERT_TRUE(s.sweep && s.sweep->z);
    EXPECT_EQ(s.sweep->z->steps, 20u);
    EXPECT_EQ(s.solver.seed, 7u);
}

TEST(ParseScenario, GridFromFile) {
    const auto s = load_scenario(kScenarios / "grid_poisson.json");
    const auto& a = localisation_of(s.inputs[0]);
    const auto& b = localisation_of(s.inputs[1]);
    ASSERT_TRUE(a.is_grid());
    ASSERT_TRUE(b.is_grid());
    EXPECT_TRUE(a.grid().geometry().aligned_with(b.grid().geometry()));
    EXPECT_THROW(load_scenario(kScenarios / "no_such_file.json"), InputError);
}

TEST(SweepSpec, CovarianceShape) {
    SweepSpec sweep;
    const Matrix c = sweep.covariance(4.0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(c);
    EXPECT_NEAR(es.eigenvalues()(1), 1.0, 1e-12);
    EXPECT_NEAR(es.eigenvalues()(1) / es.eigenvalues()(0), 4.0, 1e-9);
    sweep.det_sigma = 0.01;
    const Matrix d = sweep.covariance(4.0, 1);
    EXPECT_NEAR(d.determinant(), 0.01, 1e-12);
    EXPECT_LT(d(0, 1), 0.0);
}

TEST(RangeSpec, Values) {
    const auto v = RangeSpec{0.0, 1.0, 5}.values();
    ASSERT_EQ(v.size(), 5u);
    EXPECT_EQ(v.front(), 0.0);
    EXPECT_EQ(v.back(), 1.0);
    EXPECT_EQ(v[2], 0.5);
    EXPECT_EQ(RangeSpec({3.0, 3.0, 1}).values(), std::vector<double>{3.0});
}

TEST(FormatNumber, RoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
    EXPECT_EQ(format_number(2.0), "2");
    const double x = 0.123456789012345678;
    EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(CsvTable, Format) {
    CsvTable t;
    t.header = {"a", "b"};
    t.rows = {{"1", "2"}, {"3", ""}};
    EXPECT_EQ(t.str(), "a,b\n1,2\n3,\n");
}

TEST(FuseScenario, P2AndConsistent) {
    const auto s = parse_scenario(minimal_bernoulli());
    const auto p2 = fuse_scenario(s, FuseMode::p2);
    const auto t2 = fuse_table(s, FuseMode::p2, p2);
    ASSERT_EQ(t2.rows.size(), 1u);
    EXPECT_EQ(t2.rows[0][column(t2, "mode")], "p2");
    EXPECT_EQ(cell(t2, 0, "omega_card"), 0.5);
    const double alpha = cell(t2, 0, "fused_alpha");
    const double flag = cell(t2, 0, "inconsistent_flag");
    EXPECT_EQ(flag, (alpha < 0.6 || alpha > 0.8) ? 1.0 : 0.0);

    const auto cons = fuse_scenario(s, FuseMode::consistent);
    const auto tc = fuse_table(s, FuseMode::consistent, cons);
    const double ac = cell(tc, 0, "fused_alpha");
    EXPECT_GE(ac, 0.6);
    EXPECT_LE(ac, 0.8);
    EXPECT_EQ(cell(tc, 0, "inconsistent_flag"), 0.0);
}

TEST(FuseScenario, IdenticalInputs) {
    const auto s = load_scenario(kScenarios / "identical.json");
    const auto r = fuse_scenario(s, FuseMode::consistent);
    EXPECT_EQ(std::get<Bernoulli>(r.fused), std::get<Bernoulli>(s.inputs[0]));
    const auto t = fuse_table(s, FuseMode::consistent, r);
    EXPECT_EQ(cell(t, 0, "degenerate_localisation"), 1.0);
}

TEST(FuseScenario, DisjointIidP2IsSolverError) {
    const auto s = load_scenario(kScenarios / "disjoint_iid.json");
    EXPECT_THROW(fuse_scenario(s, FuseMode::p2), SolverError);
}

TEST(FuseScenario, GridPoisson) {
    const auto s = load_scenario(kScenarios / "grid_poisson.json");
    const auto r = fuse_scenario(s, FuseMode::consistent);
    const double lambda = std::get<Poisson>(r.fused).lambda();
    EXPECT_GE(lambda, 1.5);
    EXPECT_LE(lambda, 2.5);
    EXPECT_TRUE(localisation_of(r.fused).is_grid());
}

TEST(SweepScenario, FlagsMatchRowValues) {
    const auto s = load_scenario(kScenarios / "example1.json");
    auto small = s;
    small.sweep->kappa = RangeSpec{1.0, 40.0, 4};
    small.sweep->omega = RangeSpec{0.0, 1.0, 11};
    const auto t = sweep_scenario(small, 1);
    ASSERT_EQ(t.rows.size(), 44u);
    EXPECT_EQ(t.header[0], "kappa");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double a = cell(t, r, "alpha_omega");
        EXPECT_EQ(cell(t, r, "inconsistent_flag"), (a < 0.8 || a > 0.8) ? 1.0 : 0.0);
        EXPECT_LE(cell(t, r, "z_omega"), 1.0 + 1e-12);
    }
}

TEST(SweepScenario, EqualMeansAtKappaOne) {
    auto s = load_scenario(kScenarios / "example1.json");
    for (auto& f : s.inputs) {
        Vector m(2);
        m << 0.25, 0.25;
        f = with_localisation(f, GaussianDensity(m, Matrix::Identity(2, 2)));
    }
    s.sweep->kappa = RangeSpec{1.0, 1.0, 1};
    s.sweep->omega = RangeSpec{0.0, 1.0, 5};
    const auto t = sweep_scenario(s, 1);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        EXPECT_NEAR(cell(t, r, "z_omega"), 1.0, 1e-12);
        EXPECT_NEAR(cell(t, r, "alpha_omega"), 0.8, 1e-12);
        EXPECT_EQ(cell(t, r, "inconsistent_flag"), 0.0);
    }
}

TEST(SweepScenario, IidZAxis) {
    const auto s = load_scenario(kScenarios / "binomial_iid.json");
    const auto t = sweep_scenario(s, 2);
    EXPECT_EQ(t.header[0], "z");
    EXPECT_EQ(t.rows.size(), 20u * 21u);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        EXPECT_EQ(cell(t, r, "inconsistent_flag"), cell(t, r, "min_ratio") < 1.0 ? 1.0 : 0.0);
    }
    // z = 1 reproduces the input MAP at both endpoints.
    EXPECT_EQ(cell(t, t.rows.size() - 1, "map_n"), 5.0);
}

TEST(SweepScenario, DeterministicAcrossJobs) {
    const auto s = load_scenario(kScenarios / "poisson.json");
    const auto a = sweep_scenario(s, 1).str();
    const auto b = sweep_scenario(s, 4).str();
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.find('\r'), std::string::npos);
}

TEST(RunCommands, WriteByteIdenticalFiles) {
    const auto d1 = scratch("a");
    const auto d2 = scratch("b");
    run_sweep(kScenarios / "binomial_iid.json", d1, 11, 1);
    run_sweep(kScenarios / "binomial_iid.json", d2, 11, 3);
    EXPECT_EQ(slurp(d1 / "sweep.csv"), slurp(d2 / "sweep.csv"));
    run_fuse(kScenarios / "poisson.json", FuseMode::consistent, d1, 5);
    run_fuse(kScenarios / "poisson.json", FuseMode::consistent, d2, 5);
    EXPECT_EQ(slurp(d1 / "fuse.csv"), slurp(d2 / "fuse.csv"));
    EXPECT_THROW(run_sweep(kScenarios / "identical.json", d1), InputError);
}
