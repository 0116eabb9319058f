// Command-line front end: run experiments, apply stored fits, export and
// import pathwise tensors.

#include "hedgeratio/config.hpp"
#include "hedgeratio/error.hpp"
#include "hedgeratio/pipeline.hpp"
#include "hedgeratio/serialize.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  2  configuration error (bad config, unknown names, dimension mismatch)\n"
    "  3  numerical error (non-finite input, singular system)\n"
    "  4  I/O error (unreadable or corrupt file)\n";

int exit_code(hr::ErrorCategory c) {
    switch (c) {
        case hr::ErrorCategory::config: return kExitConfig;
        case hr::ErrorCategory::numerical: return kExitNumerical;
        case hr::ErrorCategory::io: return kExitIo;
    }
    return kExitConfig;
}

std::string category_name(hr::ErrorCategory c) {
    switch (c) {
        case hr::ErrorCategory::config: return "config";
        case hr::ErrorCategory::numerical: return "numerical";
        case hr::ErrorCategory::io: return "io";
    }
    return "error";
}

hr::RunOptions run_options(const hr::ExperimentConfig& config, std::optional<std::size_t> threads, bool deterministic) {
    hr::RunOptions o;
    o.threads = threads.value_or(config.threads);
    o.deterministic = deterministic || config.deterministic;
    if (o.threads == 0) throw hr::ConfigError("--threads must be at least 1");
    return o;
}

void report(const nlohmann::json& result) {
    for (const auto& [name, fit] : result["fits"].items()) {
        std::cout << name << ": full_residual=" << fit["residuals"]["full_residual"].dump()
                  << " coefficients=" << fit["coefficients"].dump() << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reduced-space stochastic hedge ratios from pathwise sensitivities"};
    app.footer(kExitCodes);
    app.set_version_flag("--version", std::string("hedgeratio ") + HEDGERATIO_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::size_t> threads;
    bool deterministic = false;
    std::string out;

    auto* run = app.add_subcommand("run", "Simulate, assemble, solve and write a result file");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--threads", threads, "Worker threads for simulation and assembly");
    run->add_flag("--deterministic", deterministic, "Fixed reduction order (bitwise reproducible)");
    run->add_option("--out", out, "Result file (overrides output.result)");

    std::string result_path;
    std::string states_path;
    std::string fit;
    auto* apply = app.add_subcommand("apply", "Reconstruct hedge ratios of a stored fit on new states");
    apply->add_option("result", result_path, "Result file written by 'run'")->required();
    apply->add_option("states", states_path, "States CSV (path,<variable>...)")->required();
    apply->add_option("--out", out, "Hedge-ratio CSV (default: stdout)");
    apply->add_option("--fit", fit, "least_squares | projected | regress_pathwise (default: first present)");

    std::string dir;
    auto* exp = app.add_subcommand("export", "Simulate and write A, b, X, Y tensors and states");
    exp->add_option("config", config_path, "Experiment config (JSON)")->required();
    exp->add_option("dir", dir, "Output directory")->required();
    exp->add_option("--threads", threads, "Worker threads");

    auto* imp = app.add_subcommand("import", "Solve from exported tensors without simulating");
    imp->add_option("config", config_path, "Experiment config (JSON)")->required();
    imp->add_option("dir", dir, "Directory written by 'export'")->required();
    imp->add_option("--threads", threads, "Worker threads for assembly");
    imp->add_flag("--deterministic", deterministic, "Fixed reduction order (bitwise reproducible)");
    imp->add_option("--out", out, "Result file (overrides output.result)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) {
            const hr::ExperimentConfig config = hr::load_config(config_path);
            const auto result = hr::run_experiment(config, run_options(config, threads, deterministic),
                                                   out.empty() ? std::nullopt : std::optional<std::filesystem::path>(out));
            report(result);
        } else if (*apply) {
            const auto result = hr::parse_json_text(hr::io::read_text(result_path), result_path);
            const hr::StateTable states = hr::io::read_states_csv(states_path);
            const hr::HedgeRatioMatrix phi = hr::apply_result(result, states, fit);
            const auto names = hr::instrument_names(result);
            if (out.empty()) {
                std::cout << "path";
                for (const auto& n : names) std::cout << ',' << n;
                std::cout << '\n';
                for (Eigen::Index l = 0; l < phi.values.rows(); ++l) {
                    std::cout << l;
                    for (Eigen::Index j = 0; j < phi.values.cols(); ++j) {
                        std::cout << ',' << hr::io::format_double(phi.values(l, j));
                    }
                    std::cout << '\n';
                }
            } else {
                hr::io::write_hedge_csv(out, phi, names);
            }
        } else if (*exp) {
            const hr::ExperimentConfig config = hr::load_config(config_path);
            const auto data = hr::generate_problem(config, threads.value_or(config.threads));
            hr::export_problem(data, dir);
        } else if (*imp) {
            const hr::ExperimentConfig config = hr::load_config(config_path);
            const auto options = run_options(config, threads, deterministic);
            const auto data = hr::import_problem(config, dir);
            auto result = hr::solve_problem(config, data, options);
            const std::filesystem::path target = out.empty() ? std::filesystem::path(config.output.result) : std::filesystem::path(out);
            hr::io::write_text(target, result.dump(2) + "\n");
            report(result);
        }
    } catch (const hr::Error& e) {
        std::cerr << "error (" << category_name(e.category()) << "): " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const std::bad_alloc&) {
        std::cerr << "error (numerical): out of memory\n";
        return kExitNumerical;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error (config): malformed document: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
