#pragma once

#include "hedgeratio/basis.hpp"
#include "hedgeratio/config.hpp"
#include "hedgeratio/models.hpp"
#include "hedgeratio/parallel.hpp"
#include "hedgeratio/tensors.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace hr {

inline constexpr const char* kResultFormat = "hedgeratio-result";
inline constexpr int kResultVersion = 1;

struct RunOptions {
    std::size_t threads = 1;
    /// Fixed reduction order; results are bitwise reproducible for any thread count.
    bool deterministic = false;

    [[nodiscard]] AssemblyOptions assembly() const;
};

/// Simulated states, pathwise sensitivities and raw basis values of one run.
struct ProblemData {
    StateTable states;
    SensitivityTensor a;
    PrimitiveSensitivities b;
    KinkReport kinks;
    Matrix z;                       // raw solution basis, N x r
    std::optional<Matrix> z_test;   // raw test basis; unset for Galerkin
};

/// Simulate, differentiate and evaluate the raw bases. `seed` overrides the model seed.
[[nodiscard]] ProblemData generate_problem(const ExperimentConfig& config, std::size_t threads,
                                           std::optional<std::uint64_t> seed = std::nullopt);

/// Orthonormalize, assemble, solve and diagnose. Returns the result document.
[[nodiscard]] Json solve_problem(const ExperimentConfig& config, const ProblemData& data, const RunOptions& options);

/// generate_problem + solve_problem, then writes the configured outputs.
/// `out` overrides output.result.
Json run_experiment(const ExperimentConfig& config, const RunOptions& options,
                    const std::optional<std::filesystem::path>& out = std::nullopt);

/// Evaluates the stored basis and transform on `states` and reconstructs
/// hedge ratios from the fit named `fit` ("least_squares", "projected",
/// "regress_pathwise"); empty picks the first fit present in that order.
[[nodiscard]] HedgeRatioMatrix apply_result(const Json& result, const StateTable& states, const std::string& fit = {});

[[nodiscard]] std::vector<std::string> instrument_names(const Json& result);

/// Writes A.hrt, b.hrt, X.hrt (raw basis), Y.hrt (raw test basis, Petrov-Galerkin only) and states.csv.
void export_problem(const ProblemData& data, const std::filesystem::path& dir);

/// Reads an exported directory and checks its shapes against `config`.
/// Throws DimensionError on a mismatch and CorruptFileError on bad files.
[[nodiscard]] ProblemData import_problem(const ExperimentConfig& config, const std::filesystem::path& dir);

}  // namespace hr
