#include "setfuse/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "setfuse/diagnostics.hpp"
#include "setfuse/emd_fusion.hpp"
#include "setfuse/error.hpp"
#include "setfuse/gaussian_ops.hpp"

namespace setfuse {

using json = nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!obj.is_object()) throw InputError(std::string(where) + ": expected an object");
    for (const auto& item : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw InputError(std::string(where) + ": unknown field '" + item.key() + "'");
        }
    }
}

const json& require(const json& obj, const char* key, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw InputError(std::string(where) + ": missing field '" + key + "'");
    return *it;
}

double as_number(const json& value, std::string_view where) {
    if (!value.is_number()) throw InputError(std::string(where) + ": expected a number");
    return value.get<double>();
}

std::size_t as_count(const json& value, std::string_view where) {
    if (!value.is_number_unsigned()) throw InputError(std::string(where) + ": expected a nonnegative integer");
    return value.get<std::size_t>();
}

std::vector<double> as_numbers(const json& value, std::string_view where) {
    if (!value.is_array()) throw InputError(std::string(where) + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(value.size());
    for (const auto& v : value) out.push_back(as_number(v, where));
    return out;
}

Vector as_vector(const json& value, std::string_view where) {
    const auto values = as_numbers(value, where);
    if (values.empty()) throw InputError(std::string(where) + ": empty vector");
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Matrix as_matrix(const json& value, std::size_t dim, std::string_view where) {
    if (!value.is_array() || value.size() != dim) {
        throw InputError(std::string(where) + ": expected a " + std::to_string(dim) + "x" + std::to_string(dim) +
                         " matrix");
    }
    Matrix m(dim, dim);
    for (std::size_t r = 0; r < dim; ++r) {
        const auto row = as_numbers(value[r], where);
        if (row.size() != dim) throw InputError(std::string(where) + ": ragged matrix row");
        for (std::size_t c = 0; c < dim; ++c) m(r, c) = row[c];
    }
    return m;
}

RangeSpec as_range(const json& value, std::string_view where) {
    if (!value.is_array() || value.size() != 3) throw InputError(std::string(where) + ": expected [min, max, steps]");
    RangeSpec r{as_number(value[0], where), as_number(value[1], where), as_count(value[2], where)};
    if (r.steps < 1) throw InputError(std::string(where) + ": range needs at least one step");
    if (r.min > r.max) throw InputError(std::string(where) + ": range min exceeds max");
    if (r.steps == 1 && r.min != r.max) throw InputError(std::string(where) + ": a single step needs min == max");
    return r;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str());
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

GridDensity parse_grid(const json& obj, std::string_view where) {
    check_keys(obj, {"type", "origin", "cell_size", "shape", "values"}, where);
    GridGeometry geometry;
    geometry.origin = as_vector(require(obj, "origin", where), where);
    geometry.cell_size = as_vector(require(obj, "cell_size", where), where);
    const json& shape = require(obj, "shape", where);
    if (!shape.is_array()) throw InputError(std::string(where) + ": shape must be an array");
    for (const auto& s : shape) geometry.shape.push_back(as_count(s, where));
    if (geometry.shape.size() != static_cast<std::size_t>(geometry.origin.size()) ||
        geometry.shape.size() != static_cast<std::size_t>(geometry.cell_size.size())) {
        throw InputError(std::string(where) + ": origin, cell_size and shape disagree in dimension");
    }
    auto values = as_numbers(require(obj, "values", where), where);
    if (values.size() != geometry.cell_count()) throw InputError(std::string(where) + ": values do not match shape");
    return GridDensity(std::move(geometry), std::move(values));
}

LocalisationDensity parse_localisation(const json& obj, const std::filesystem::path& base_dir,
                                       std::string_view where) {
    const json& type = require(obj, "type", where);
    if (type == "gaussian") {
        check_keys(obj, {"type", "mean", "covariance"}, where);
        Vector mean = as_vector(require(obj, "mean", where), where);
        Matrix cov = as_matrix(require(obj, "covariance", where), static_cast<std::size_t>(mean.size()), where);
        return GaussianDensity(std::move(mean), std::move(cov));
    }
    if (type == "grid") {
        if (obj.contains("file")) {
            check_keys(obj, {"type", "file"}, where);
            const json& file = obj["file"];
            if (!file.is_string()) throw InputError(std::string(where) + ": file must be a string");
            std::filesystem::path path = file.get<std::string>();
            if (path.is_relative()) path = base_dir / path;
            json grid = read_json_file(path);
            if (!grid.is_object()) throw InputError(path.string() + ": expected an object");
            grid["type"] = "grid";
            return parse_grid(grid, path.string());
        }
        return parse_grid(obj, where);
    }
    throw InputError(std::string(where) + ": localisation type must be 'gaussian' or 'grid'");
}

CardinalityPmf parse_cardinality(const json& obj, std::string_view where) {
    check_keys(obj, {"pmf", "binomial", "poisson"}, where);
    if (obj.size() != 1) throw InputError(std::string(where) + ": give exactly one of pmf, binomial, poisson");
    if (obj.contains("pmf")) return CardinalityPmf(as_numbers(obj["pmf"], where));
    if (obj.contains("binomial")) {
        const json& b = obj["binomial"];
        check_keys(b, {"trials", "success"}, where);
        return CardinalityPmf::binomial(as_count(require(b, "trials", where), where),
                                        as_number(require(b, "success", where), where));
    }
    const json& p = obj["poisson"];
    check_keys(p, {"lambda", "n_max"}, where);
    const double lambda = as_number(require(p, "lambda", where), where);
    const std::size_t n_max = p.contains("n_max") ? as_count(p["n_max"], where) : default_poisson_n_max(lambda);
    return CardinalityPmf::poisson(lambda, n_max);
}

FiniteSetDistribution parse_input(const json& obj, std::string_view family, const std::filesystem::path& base_dir,
                                  std::string_view where) {
    if (family == "bernoulli") {
        check_keys(obj, {"alpha", "localisation"}, where);
        return Bernoulli(as_number(require(obj, "alpha", where), where),
                         parse_localisation(require(obj, "localisation", where), base_dir, where));
    }
    if (family == "poisson") {
        check_keys(obj, {"lambda", "localisation"}, where);
        return Poisson(as_number(require(obj, "lambda", where), where),
                       parse_localisation(require(obj, "localisation", where), base_dir, where));
    }
    check_keys(obj, {"cardinality", "localisation"}, where);
    return IidCluster(parse_cardinality(require(obj, "cardinality", where), where),
                      parse_localisation(require(obj, "localisation", where), base_dir, where));
}

SweepSpec parse_sweep(const json& obj) {
    constexpr std::string_view where = "sweep";
    check_keys(obj, {"kappa", "z", "omega", "det_sigma", "major_variance", "phi"}, where);
    SweepSpec sweep;
    if (obj.contains("kappa") == obj.contains("z")) throw InputError("sweep: give exactly one of kappa or z");
    if (obj.contains("kappa")) {
        sweep.kappa = as_range(obj["kappa"], "sweep.kappa");
        if (sweep.kappa->min < 1.0) throw InputError("sweep.kappa: condition numbers must be >= 1");
    } else {
        sweep.z = as_range(obj["z"], "sweep.z");
        if (!(sweep.z->min > 0.0 && sweep.z->max <= 1.0)) throw InputError("sweep.z: scale factors must lie in (0, 1]");
    }
    if (obj.contains("omega")) {
        sweep.omega = as_range(obj["omega"], "sweep.omega");
        if (sweep.omega.min < 0.0 || sweep.omega.max > 1.0) throw InputError("sweep.omega: weights must lie in [0, 1]");
    }
    if (obj.contains("det_sigma") && obj.contains("major_variance")) {
        throw InputError("sweep: det_sigma and major_variance are mutually exclusive");
    }
    if (obj.contains("det_sigma")) {
        sweep.det_sigma = as_number(obj["det_sigma"], "sweep.det_sigma");
        if (!(*sweep.det_sigma > 0.0)) throw InputError("sweep.det_sigma must be positive");
    }
    if (obj.contains("major_variance")) {
        sweep.major_variance = as_number(obj["major_variance"], "sweep.major_variance");
        if (!(sweep.major_variance > 0.0)) throw InputError("sweep.major_variance must be positive");
    }
    if (obj.contains("phi")) {
        const auto phi = as_numbers(obj["phi"], "sweep.phi");
        if (phi.size() != 2) throw InputError("sweep.phi: expected two angles");
        sweep.phi = {phi[0], phi[1]};
    }
    return sweep;
}

NewtonConfig parse_solver(const json& obj) {
    constexpr std::string_view where = "solver";
    check_keys(obj, {"omega_init", "epsilon", "max_iters", "omega_clamp", "mc_samples", "seed"}, where);
    NewtonConfig config;
    if (obj.contains("omega_init")) config.omega_init = as_number(obj["omega_init"], where);
    if (obj.contains("epsilon")) config.epsilon = as_number(obj["epsilon"], where);
    if (obj.contains("max_iters")) config.max_iters = as_count(obj["max_iters"], where);
    if (obj.contains("omega_clamp")) config.omega_clamp = as_number(obj["omega_clamp"], where);
    if (obj.contains("mc_samples")) config.mc_samples = as_count(obj["mc_samples"], where);
    if (obj.contains("seed")) config.seed = as_count(obj["seed"], where);
    config.validate();
    return config;
}

Scenario parse_document(const json& doc, const std::filesystem::path& base_dir) {
    check_keys(doc, {"version", "family", "inputs", "omega", "sweep", "solver", "outputs"}, "scenario");
    const json& version = require(doc, "version", "scenario");
    if (!version.is_number_integer() || version.get<int>() != 1) throw InputError("scenario: unsupported version");
    const json& family_field = require(doc, "family", "scenario");
    if (!family_field.is_string()) throw InputError("scenario: family must be a string");
    const auto family = family_field.get<std::string>();
    if (family != "bernoulli" && family != "poisson" && family != "iid") {
        throw InputError("scenario: family must be bernoulli, poisson or iid");
    }
    const json& inputs = require(doc, "inputs", "scenario");
    if (!inputs.is_array() || inputs.size() != 2) throw InputError("scenario: inputs must hold exactly two entries");

    Scenario scenario(parse_input(inputs[0], family, base_dir, "inputs[0]"),
                      parse_input(inputs[1], family, base_dir, "inputs[1]"));
    if (localisation_of(scenario.inputs[0]).dim() != localisation_of(scenario.inputs[1]).dim()) {
        throw InputError("scenario: inputs have different state dimensions");
    }
    if (doc.contains("omega")) {
        scenario.omega = as_number(doc["omega"], "omega");
        if (!(scenario.omega >= 0.0 && scenario.omega <= 1.0)) throw InputError("omega must lie in [0, 1]");
    }
    if (doc.contains("sweep")) {
        scenario.sweep = parse_sweep(doc["sweep"]);
        if (scenario.sweep->kappa) {
            for (const auto& f : scenario.inputs) {
                const auto& loc = localisation_of(f);
                if (!loc.is_gaussian() || loc.dim() != 2) {
                    throw InputError("sweep.kappa needs two-dimensional Gaussian localisation densities");
                }
            }
        }
    }
    if (doc.contains("solver")) scenario.solver = parse_solver(doc["solver"]);
    if (doc.contains("outputs")) {
        if (!doc["outputs"].is_string()) throw InputError("outputs must be a path string");
        scenario.outputs = doc["outputs"].get<std::string>();
    }
    return scenario;
}

std::string flag(bool value) { return value ? "1" : "0"; }

// Fixed-weight fusion at a given scale factor, reported as sweep columns.
std::vector<std::string> sweep_cells(const Scenario& scenario, double z, double omega) {
    const auto& f_i = scenario.inputs[0];
    const auto& f_j = scenario.inputs[1];
    if (const auto* bi = std::get_if<Bernoulli>(&f_i)) {
        const double a_i = bi->alpha();
        const double a_j = std::get<Bernoulli>(f_j).alpha();
        const double alpha = bernoulli_existence_p2(a_i, a_j, z, omega);
        const bool inconsistent = alpha < std::min(a_i, a_j) || alpha > std::max(a_i, a_j);
        return {format_number(z), format_number(alpha), flag(inconsistent)};
    }
    if (const auto* pi = std::get_if<Poisson>(&f_i)) {
        const double l_i = pi->lambda();
        const double l_j = std::get<Poisson>(f_j).lambda();
        const double lambda = poisson_rate_p2(l_i, l_j, z, omega);
        const bool inconsistent = lambda < std::min(l_i, l_j) || lambda > std::max(l_i, l_j);
        return {format_number(z), format_number(lambda), flag(inconsistent)};
    }
    const auto& ci = std::get<IidCluster>(f_i).card();
    const auto& cj = std::get<IidCluster>(f_j).card();
    const std::size_t top = std::max(ci.n_max(), cj.n_max());
    const auto fused = fused_cardinality_p2(ci.padded(top), cj.padded(top), geometric_scale_sequence(z, top), omega);
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n <= top; ++n) {
        const double floor = std::min(ci(n), cj(n));
        if (floor > 0.0) min_ratio = std::min(min_ratio, fused.pmf(n) / floor);
    }
    return {format_number(z), std::to_string(fused.pmf.map()), format_number(min_ratio), flag(min_ratio < 1.0)};
}

// Runs body(k) for k in [0, count) on up to `jobs` threads; rethrows the
// exception of the lowest failing index.
template <typename Body>
void parallel_for(std::size_t count, std::size_t jobs, Body body) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                body(k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

std::vector<double> RangeSpec::values() const {
    if (steps == 1) return {min};
    return linspace(min, max, steps);
}

Matrix SweepSpec::covariance(double kappa, std::size_t input) const {
    const double phi_k = phi.at(input);
    if (det_sigma) return make_rotated_covariance(kappa, *det_sigma, phi_k);
    return make_rotated_covariance_fixed_major(kappa, major_variance, phi_k);
}

Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InputError(std::string("scenario is not valid JSON: ") + e.what());
    }
    try {
        return parse_document(doc, base_dir);
    } catch (const json::exception& e) {
        throw InputError(std::string("scenario: ") + e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scenario " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), path.parent_path().empty() ? "." : path.parent_path());
}

FiniteSetDistribution with_localisation(const FiniteSetDistribution& f, LocalisationDensity loc) {
    if (const auto* b = std::get_if<Bernoulli>(&f)) return Bernoulli(b->alpha(), std::move(loc));
    if (const auto* p = std::get_if<Poisson>(&f)) return Poisson(p->lambda(), std::move(loc));
    return IidCluster(std::get<IidCluster>(f).card(), std::move(loc));
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string CsvTable::str() const {
    std::string out;
    auto append_row = [&out](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) out += ',';
            out += cells[k];
        }
        out += '\n';
    };
    append_row(header);
    for (const auto& row : rows) append_row(row);
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << str();
}

FuseMode parse_fuse_mode(std::string_view name) {
    if (name == "p2") return FuseMode::p2;
    if (name == "consistent") return FuseMode::consistent;
    throw InputError("mode must be p2 or consistent");
}

std::string_view fuse_mode_name(FuseMode mode) { return mode == FuseMode::p2 ? "p2" : "consistent"; }

FusionResult fuse_scenario(const Scenario& scenario, FuseMode mode) {
    const auto& f_i = scenario.inputs[0];
    const auto& f_j = scenario.inputs[1];
    if (mode == FuseMode::consistent) return consistent_fuse(f_i, f_j, scenario.solver);

    const double omega = scenario.omega;
    const double z = emd_scale(localisation_of(f_i), localisation_of(f_j), omega);
    FusionResult result{fuse_p2(f_i, f_j, omega), omega, {omega}, {z}, {}, std::nullopt, std::nullopt};
    result.flags.degenerate_localisation = localisation_of(f_i) == localisation_of(f_j);
    result.flags.cardinality_inconsistent = cardinality_inconsistent(result.fused, f_i, f_j);
    return result;
}

CsvTable fuse_table(const Scenario& scenario, FuseMode mode, const FusionResult& result) {
    CsvTable table;
    table.header = {"family",       "mode",         "omega_card",        "omega_loc",
                    "z_omega",      "fused_alpha",  "fused_lambda",      "fused_map_n",
                    "degenerate_localisation",      "degenerate_cardinality",
                    "closed_form_clamped",          "inconsistent_flag"};
    std::string alpha, lambda, map_n;
    if (const auto* b = std::get_if<Bernoulli>(&result.fused)) {
        alpha = format_number(b->alpha());
        map_n = b->alpha() > 0.5 ? "1" : "0";
    } else if (const auto* p = std::get_if<Poisson>(&result.fused)) {
        lambda = format_number(p->lambda());
        map_n = std::to_string(cardinality_of(result.fused).map());
    } else {
        map_n = std::to_string(std::get<IidCluster>(result.fused).card().map());
    }
    const auto& flags = result.flags;
    table.rows.push_back({std::string(scenario.family()), std::string(fuse_mode_name(mode)),
                          format_number(result.omega_card), format_number(result.omega_loc.front()),
                          format_number(result.z_values.front()), alpha, lambda, map_n,
                          flag(flags.degenerate_localisation), flag(flags.degenerate_cardinality),
                          flag(flags.closed_form_clamped), flag(flags.cardinality_inconsistent)});
    return table;
}

CsvTable sweep_scenario(const Scenario& scenario, std::size_t jobs) {
    if (!scenario.sweep) throw InputError("scenario has no sweep block");
    const SweepSpec& sweep = *scenario.sweep;
    const bool kappa_axis = sweep.kappa.has_value();
    const auto axis = kappa_axis ? sweep.kappa->values() : sweep.z->values();
    const auto omegas = sweep.omega.values();

    CsvTable table;
    table.header = {kappa_axis ? "kappa" : "z", "omega", "z_omega"};
    const std::string_view family = scenario.family();
    if (family == "bernoulli") table.header.push_back("alpha_omega");
    else if (family == "poisson") table.header.push_back("lambda_omega");
    else table.header.insert(table.header.end(), {"map_n", "min_ratio"});
    table.header.push_back("inconsistent_flag");

    std::vector<std::vector<std::vector<std::string>>> blocks(axis.size());
    parallel_for(axis.size(), jobs, [&](std::size_t a) {
        std::optional<GaussianDensity> rho_i;
        std::optional<GaussianDensity> rho_j;
        if (kappa_axis) {
            rho_i.emplace(localisation_of(scenario.inputs[0]).gaussian().mean(), sweep.covariance(axis[a], 0));
            rho_j.emplace(localisation_of(scenario.inputs[1]).gaussian().mean(), sweep.covariance(axis[a], 1));
        }
        auto& block = blocks[a];
        block.reserve(omegas.size());
        for (const double omega : omegas) {
            const double z = kappa_axis ? gaussian_emd_scale(*rho_i, *rho_j, omega) : axis[a];
            std::vector<std::string> row{format_number(axis[a]), format_number(omega)};
            auto cells = sweep_cells(scenario, z, omega);
            row.insert(row.end(), cells.begin(), cells.end());
            block.push_back(std::move(row));
        }
    });
    for (auto& block : blocks) {
        for (auto& row : block) table.rows.push_back(std::move(row));
    }
    return table;
}

FusionResult run_fuse(const std::filesystem::path& scenario_path, FuseMode mode, const std::filesystem::path& out_dir,
                      std::optional<std::uint64_t> seed) {
    Scenario scenario = load_scenario(scenario_path);
    if (seed) scenario.solver.seed = *seed;
    FusionResult result = fuse_scenario(scenario, mode);
    fuse_table(scenario, mode, result).write(out_dir / "fuse.csv");
    return result;
}

CsvTable run_sweep(const std::filesystem::path& scenario_path, const std::filesystem::path& out_dir,
                   std::optional<std::uint64_t> seed, std::size_t jobs) {
    Scenario scenario = load_scenario(scenario_path);
    if (seed) scenario.solver.seed = *seed;
    CsvTable table = sweep_scenario(scenario, jobs);
    table.write(out_dir / "sweep.csv");
    return table;
}

}  // namespace setfuse
