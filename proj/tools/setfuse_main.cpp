#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "setfuse/error.hpp"
#include "setfuse/reproduce.hpp"
#include "setfuse/scenario.hpp"
#include "setfuse/solvers.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("setfuse");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("SETFUSE_LOG")) {
        const std::string level = env;
        if (level == "error") spdlog::set_level(spdlog::level::err);
        else if (level == "warn") spdlog::set_level(spdlog::level::warn);
        else if (level == "info") spdlog::set_level(spdlog::level::info);
        else if (level == "debug") spdlog::set_level(spdlog::level::debug);
        else spdlog::warn("ignoring SETFUSE_LOG={} (expected error, warn, info or debug)", level);
    }
}

void dump_trace(const setfuse::NewtonTrace& trace) {
    spdlog::error("newton trace: {} iterations, converged={}", trace.iterations, trace.converged);
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
        const auto& s = trace.steps[k];
        spdlog::error("  {:3d} omega={:.17g} objective={:.17g} dz={:.6g} d2z={:.6g}{}", k, s.omega, s.objective, s.dz,
                      s.d2z, s.bisection ? " (bisection)" : "");
    }
}

void log_trace(const char* label, const std::optional<setfuse::NewtonTrace>& trace) {
    if (!trace) return;
    spdlog::debug("{} trace: {} iterations, converged={}, degenerate={}", label, trace->iterations, trace->converged,
                  trace->degenerate);
    for (const auto& s : trace->steps) {
        spdlog::debug("  omega={:.17g} objective={:.17g} dz={:.6g} d2z={:.6g}", s.omega, s.objective, s.dz, s.d2z);
    }
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"Exponential-mixture fusion of finite-set distributions"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string mode_name = "consistent";
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
    std::string example_id;

    auto* fuse = app.add_subcommand("fuse", "Fuse the two inputs of a scenario");
    fuse->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    fuse->add_option("--mode", mode_name, "p2 (fixed weight) or consistent")
        ->check(CLI::IsMember({"p2", "consistent"}));
    fuse->add_option("--out", out_dir, "Output directory (defaults to the scenario's outputs field)");
    fuse->add_option("--seed", seed, "Override the solver seed");

    auto* sweep = app.add_subcommand("sweep", "Fixed-weight fusion over the scenario's sweep grid");
    sweep->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out_dir, "Output directory (defaults to the scenario's outputs field)");
    sweep->add_option("--seed", seed, "Override the solver seed");
    sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    auto* reproduce = app.add_subcommand("reproduce", "Regenerate a built-in example");
    reproduce->add_option("example", example_id, "ex1, ex2, ex3 or ex4")
        ->required()
        ->check(CLI::IsMember({"ex1", "ex2", "ex3", "ex4"}));
    reproduce->add_option("--out", out_dir, "Output directory")->required();
    reproduce->add_option("--seed", seed, "Solver seed");
    reproduce->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        auto resolve_out = [&]() -> std::filesystem::path {
            if (!out_dir.empty()) return out_dir;
            return setfuse::load_scenario(scenario_path).outputs;
        };
        if (fuse->parsed()) {
            const auto mode = setfuse::parse_fuse_mode(mode_name);
            const auto out = resolve_out();
            spdlog::info("fusing {} in {} mode", scenario_path, mode_name);
            const auto result = setfuse::run_fuse(scenario_path, mode, out, seed);
            log_trace("localisation", result.loc_trace);
            log_trace("cardinality", result.card_trace);
            std::cout << setfuse::fuse_table(setfuse::load_scenario(scenario_path), mode, result).str();
            spdlog::info("wrote {}", (out / "fuse.csv").string());
        } else if (sweep->parsed()) {
            const auto out = resolve_out();
            const auto table = setfuse::run_sweep(scenario_path, out, seed, jobs);
            spdlog::info("wrote {} rows to {}", table.rows.size(), (out / "sweep.csv").string());
        } else {
            const auto report = setfuse::reproduce(example_id, out_dir, seed.value_or(1), jobs);
            for (const auto& line : report.summary) std::cout << line << '\n';
            if (!report.passed) spdlog::warn("{}: some checks failed", example_id);
            spdlog::info("wrote {}", (std::filesystem::path(out_dir) / "summary.txt").string());
        }
    } catch (const setfuse::InputError& e) {
        spdlog::error("input error: {}", e.what());
        return kExitInput;
    } catch (const setfuse::NewtonFailure& e) {
        spdlog::error("solver error: {}", e.what());
        dump_trace(e.trace());
        return kExitSolver;
    } catch (const setfuse::SolverError& e) {
        spdlog::error("solver error: {}", e.what());
        return kExitSolver;
    } catch (const std::filesystem::filesystem_error& e) {
        spdlog::error("input error: {}", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        spdlog::error("solver error: {}", e.what());
        return kExitSolver;
    }
    return kExitOk;
}
