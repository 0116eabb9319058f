#pragma once

#include "hedgeratio/basis.hpp"
#include "hedgeratio/models.hpp"
#include "hedgeratio/solve.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hr {

using Json = nlohmann::json;

enum class Formulation { ls, projected, both, compare };

[[nodiscard]] std::string_view to_string(Formulation f) noexcept;

struct BasisConfig {
    BasisSpec spec;
    double drop_tol = kDefaultDropTol;
    bool orthonormalize = true;
};

struct RegularizationConfig {
    double lambda = 0.0;
    /// Extra fits, one per value, reported in the lambda sweep.
    std::vector<double> lambda_grid;
    std::optional<Matrix> l;
    std::optional<Vector> z0;

    [[nodiscard]] RegularizationSpec spec(double lambda_value) const;
};

struct SolverConfig {
    double rcond = kDefaultRcond;
    /// Least-squares fits with more unknowns than this skip the normal
    /// equations and use the matrix-free solver.
    std::size_t explicit_max_unknowns = 2000;
    bool least_squares_fallback = false;
    double tolerance = 1e-13;
    std::size_t max_iterations = 0;

    [[nodiscard]] SolveOptions options() const;
};

struct OutputConfig {
    std::string result = "result.json";
    std::string hedge_csv;     // empty: not written
    std::string residual_csv;  // per-path residual norms of every fit
    std::string states_csv;
};

struct ExperimentConfig {
    GbmModel model;
    ProductSpec product;
    std::vector<std::string> primitives;
    std::vector<InstrumentSpec> instruments;
    BasisConfig solution_basis;
    /// Unset means Galerkin (test basis = solution basis).
    std::optional<BasisConfig> test_basis;
    Formulation formulation = Formulation::ls;
    RegularizationConfig regularization;
    SolverConfig solver;
    std::optional<std::uint64_t> holdout_seed;
    double kink_band = kDefaultKinkBand;
    OutputConfig output;
    bool deterministic = false;
    std::size_t threads = 1;
    /// The parsed document, echoed into result files.
    Json source;

    [[nodiscard]] bool galerkin() const noexcept { return !test_basis.has_value(); }
};

/// Throws ConfigError on unknown keys, bad values or unresolved names.
[[nodiscard]] ExperimentConfig parse_config(const Json& doc);
/// Throws IoError if unreadable, ConfigError if unparseable.
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);
[[nodiscard]] Json parse_json_text(const std::string& text, const std::string& what);

[[nodiscard]] Json to_json(const BasisSpec& spec);
[[nodiscard]] BasisSpec basis_spec_from_json(const Json& doc);

[[nodiscard]] Json to_json(const Matrix& m);
[[nodiscard]] Matrix matrix_from_json(const Json& doc, const std::string& what);
[[nodiscard]] Json to_json(const Vector& v);
[[nodiscard]] Vector vector_from_json(const Json& doc, const std::string& what);

}  // namespace hr
