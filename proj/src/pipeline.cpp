#include "hedgeratio/pipeline.hpp"

#include "hedgeratio/diagnostics.hpp"
#include "hedgeratio/error.hpp"
#include "hedgeratio/reduce_ls.hpp"
#include "hedgeratio/reduce_projected.hpp"
#include "hedgeratio/serialize.hpp"
#include "hedgeratio/solve.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <map>

namespace hr {
namespace {

/// JSON has no Inf/NaN; those are written as strings.
Json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

Json to_json(const SolveReport& r) {
    return Json{{"method", std::string(to_string(r.method))},
                {"residual_norm", number(r.residual_norm)},
                {"rank", r.rank},
                {"condition_estimate", number(r.condition_estimate)},
                {"iterations", r.iterations}};
}

Json to_json(const ResidualReport& r) {
    Json j{{"full_residual", number(r.full_residual)}, {"design_orthogonality", number(r.design_orthogonality)}};
    double worst = 0.0;
    for (double v : r.per_path_norms) worst = std::max(worst, v);
    j["max_path_residual"] = number(worst);
    j["projected_residual"] = r.projected_residual ? number(*r.projected_residual) : Json(nullptr);
    j["tested_moments"] = r.tested_moments ? number(*r.tested_moments) : Json(nullptr);
    return j;
}

Json basis_json(const BasisSet& set, const BasisConfig& config) {
    return Json{{"spec", hr::to_json(config.spec)},
                {"orthonormalize", config.orthonormalize},
                {"drop_tol", config.drop_tol},
                {"raw_size", set.raw_size()},
                {"size", set.size()},
                {"dropped", set.dropped},
                {"transform", hr::to_json(set.transform)},
                {"basis_id", set.ortho.id}};
}

BasisSet build_basis(const Matrix& z, const BasisConfig& config) {
    return config.orthonormalize ? orthonormalize(z, config.drop_tol, config.spec) : raw_basis(z, config.spec);
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double vector_norm(const HedgeCoefficients& xi) { return xi.values().norm(); }

struct Fit {
    HedgeCoefficients coefficients;
    std::optional<SolveReport> solve;
    ResidualReport residuals;
    std::optional<double> holdout_residual;
};

}  // namespace

AssemblyOptions RunOptions::assembly() const {
    AssemblyOptions o;
    o.threads = threads;
    o.reduction = deterministic || threads <= 1 ? Reduction::pairwise : Reduction::dynamic;
    return o;
}

ProblemData generate_problem(const ExperimentConfig& config, std::size_t threads, std::optional<std::uint64_t> seed) {
    GbmModel model = config.model;
    if (seed) model.seed = *seed;
    StateTable states = simulate(model, threads);
    PrimitiveSensitivityResult prim =
        primitive_sensitivities(model, config.product, config.primitives, states, config.kink_band, threads);
    SensitivityTensor a = hedge_instrument_sensitivities(states, config.instruments, config.primitives);
    Matrix z = evaluate_basis(config.solution_basis.spec, states);
    std::optional<Matrix> z_test;
    if (config.test_basis) z_test = evaluate_basis(config.test_basis->spec, states);
    return ProblemData{std::move(states), std::move(a), std::move(prim.b), std::move(prim.kinks), std::move(z),
                       std::move(z_test)};
}

Json solve_problem(const ExperimentConfig& config, const ProblemData& data, const RunOptions& options) {
    const BasisSet xs = build_basis(data.z, config.solution_basis);
    std::optional<BasisSet> ys;
    if (config.test_basis) {
        if (!data.z_test) throw ConfigError("test basis values are missing");
        ys = build_basis(*data.z_test, *config.test_basis);
    }
    const BasisMatrix& x = xs.ortho;
    const BasisMatrix& y = ys ? ys->ortho : xs.ortho;
    const ProblemDims dims = validate_problem(data.a, data.b, x.values, &y.values);

    const SolveOptions solve_options = config.solver.options();
    const AssemblyOptions assembly = options.assembly();
    const RegularizationSpec reg = config.regularization.spec(config.regularization.lambda);

    const bool want_ls = config.formulation != Formulation::projected;
    const bool want_projected = config.formulation != Formulation::ls;
    const bool matrix_free = dims.n_instruments * dims.n_basis > config.solver.explicit_max_unknowns;

    std::optional<NormalSystem> normal;
    if (want_ls && !matrix_free) normal = assemble_normal(data.a, data.b, x.values, {}, assembly);
    std::optional<ProjectedSystem> projected;
    if (want_projected) projected = assemble_projected(data.a, data.b, x.values, y.values, y.id, assembly);

    std::optional<ProblemData> holdout;
    std::optional<Matrix> x_holdout;
    if (config.holdout_seed) {
        holdout = generate_problem(config, options.threads, config.holdout_seed);
        x_holdout = apply_transform(holdout->z, xs.transform);
    }

    auto fit_ls = [&](const RegularizationSpec& r) {
        return matrix_free ? solve_matrix_free(data.a, data.b, x.values, r, x.id, solve_options)
                           : solve_reduced(*normal, r, x.id, solve_options);
    };
    auto fit_projected = [&](const RegularizationSpec& r) {
        SolveOptions o = solve_options;
        if (config.formulation == Formulation::compare) o.least_squares_fallback = true;
        return solve_reduced(*projected, r, x.id, o);
    };
    auto diagnose = [&](HedgeCoefficients xi, std::optional<SolveReport> solve) {
        ResidualReport res = residual_report(xi, data.a, data.b, x.values, &y.values, projected ? &*projected : nullptr);
        Fit f{std::move(xi), std::move(solve), std::move(res), {}};
        if (holdout) f.holdout_residual = residual_report(f.coefficients, holdout->a, holdout->b, *x_holdout).full_residual;
        return f;
    };

    std::map<std::string, Fit> fits;
    std::vector<std::string> order;
    Json comparison;
    if (config.formulation == Formulation::compare) {
        CompareOptions co{solve_options, assembly, options.threads};
        const ComparisonRecord record = compare_formulations(data.a, data.b, x, y, reg, co);
        comparison = Json::array();
        for (const auto& m : record.methods) {
            Fit f = diagnose(m.coefficients, m.solve);
            f.residuals = m.residuals;
            comparison.push_back(Json{{"method", m.method},
                                      {"full_residual", number(m.residuals.full_residual)},
                                      {"projected_residual", m.residuals.projected_residual
                                                                 ? number(*m.residuals.projected_residual)
                                                                 : Json(nullptr)},
                                      {"tested_moments", m.residuals.tested_moments
                                                             ? number(*m.residuals.tested_moments)
                                                             : Json(nullptr)},
                                      {"condition_estimate", number(m.condition_estimate)}});
            order.push_back(m.method);
            fits.emplace(m.method, std::move(f));
        }
    } else {
        if (want_ls) {
            ReducedFit r = fit_ls(reg);
            order.emplace_back("least_squares");
            fits.emplace("least_squares", diagnose(std::move(r.coefficients), std::move(r.report)));
        }
        if (want_projected) {
            ReducedFit r = fit_projected(reg);
            order.emplace_back("projected");
            fits.emplace("projected", diagnose(std::move(r.coefficients), std::move(r.report)));
        }
    }

    Json sweep = Json::array();
    for (double lambda : config.regularization.lambda_grid) {
        const RegularizationSpec r = config.regularization.spec(lambda);
        auto record = [&](const char* method, ReducedFit rf) {
            Fit f = diagnose(std::move(rf.coefficients), rf.report);
            Json e{{"lambda", lambda},
                   {"method", method},
                   {"coefficient_norm", number(vector_norm(f.coefficients))},
                   {"in_sample_residual", number(f.residuals.full_residual)},
                   {"holdout_residual", f.holdout_residual ? number(*f.holdout_residual) : Json(nullptr)},
                   {"coefficients", hr::to_json(f.coefficients.values())},
                   {"solve", to_json(*f.solve)}};
            sweep.push_back(std::move(e));
        };
        if (want_ls) record("least_squares", fit_ls(r));
        if (want_projected) record("projected", fit_projected(r));
    }

    std::vector<std::string> names;
    for (const auto& inst : config.instruments) names.push_back(inst.name());

    Json fits_json = Json::object();
    for (const auto& name : order) {
        const Fit& f = fits.at(name);
        Json j{{"coefficients", hr::to_json(f.coefficients.values())}, {"residuals", to_json(f.residuals)}};
        j["solve"] = f.solve ? to_json(*f.solve) : Json(nullptr);
        j["holdout_residual"] = f.holdout_residual ? number(*f.holdout_residual) : Json(nullptr);
        fits_json[name] = std::move(j);
    }

    Json result{{"format", kResultFormat},
                {"version", kResultVersion},
                {"config", config.source},
                {"dims",
                 {{"paths", dims.n_paths},
                  {"primitives", dims.n_primitives},
                  {"instruments", dims.n_instruments},
                  {"basis", dims.n_basis},
                  {"tests", dims.n_tests}}},
                {"primitives", config.primitives},
                {"instruments", names},
                {"formulation", std::string(to_string(config.formulation))},
                {"lambda", config.regularization.lambda},
                {"least_squares_solver", matrix_free ? "matrix_free" : "normal_equations"},
                {"basis", basis_json(xs, config.solution_basis)},
                {"fits", std::move(fits_json)},
                {"kinks", {{"band", data.kinks.band}, {"count", data.kinks.paths.size()}, {"paths", data.kinks.paths}}}};
    result["test_basis"] = ys ? basis_json(*ys, *config.test_basis) : Json("galerkin");
    if (!comparison.is_null()) result["comparison"] = std::move(comparison);
    if (!sweep.empty()) result["lambda_sweep"] = std::move(sweep);
    if (config.holdout_seed) result["holdout_seed"] = *config.holdout_seed;
    return result;
}

Json run_experiment(const ExperimentConfig& config, const RunOptions& options,
                    const std::optional<std::filesystem::path>& out) {
    const auto start = std::chrono::steady_clock::now();
    const ProblemData data = generate_problem(config, options.threads);
    Json result = solve_problem(config, data, options);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result["metadata"] = Json{{"runtime_seconds", seconds},
                              {"timestamp", timestamp()},
                              {"threads", options.threads},
                              {"deterministic", options.deterministic},
                              {"version", HEDGERATIO_VERSION}};

    const std::filesystem::path result_path = out ? *out : std::filesystem::path(config.output.result);
    io::write_text(result_path, result.dump(2) + "\n");

    if (!config.output.states_csv.empty()) io::write_states_csv(config.output.states_csv, data.states);
    if (!config.output.hedge_csv.empty()) {
        io::write_hedge_csv(config.output.hedge_csv, apply_result(result, data.states), instrument_names(result));
    }
    if (!config.output.residual_csv.empty()) {
        std::vector<std::string> methods;
        Matrix norms(static_cast<Eigen::Index>(data.states.n_paths()),
                     static_cast<Eigen::Index>(result["fits"].size()));
        Eigen::Index c = 0;
        const BasisSet xs = build_basis(data.z, config.solution_basis);
        for (const auto& [name, fit] : result["fits"].items()) {
            const HedgeCoefficients xi(matrix_from_json(fit["coefficients"], name), xs.ortho.id);
            const ResidualReport r = residual_report(xi, data.a, data.b, xs.ortho.values);
            for (std::size_t l = 0; l < r.per_path_norms.size(); ++l) {
                norms(static_cast<Eigen::Index>(l), c) = r.per_path_norms[l];
            }
            methods.push_back(name);
            ++c;
        }
        io::write_table(config.output.residual_csv, methods, norms);
    }
    return result;
}

std::vector<std::string> instrument_names(const Json& result) {
    std::vector<std::string> names;
    for (const auto& n : result.at("instruments")) names.push_back(n.get<std::string>());
    return names;
}

HedgeRatioMatrix apply_result(const Json& result, const StateTable& states, const std::string& fit) {
    if (!result.is_object() || result.value("format", std::string()) != kResultFormat) {
        throw ConfigError("not a hedge-ratio result file");
    }
    if (result.value("version", -1) != kResultVersion) {
        throw ConfigError("result file version " + result.value("version", Json(nullptr)).dump() +
                          " is not supported (expected " + std::to_string(kResultVersion) + ")");
    }
    const Json& fits = result.at("fits");
    std::string name = fit;
    if (name.empty()) {
        for (const char* candidate : {"least_squares", "projected", "regress_pathwise"}) {
            if (fits.contains(candidate)) {
                name = candidate;
                break;
            }
        }
    }
    if (!fits.contains(name)) throw ConfigError("result file has no fit named '" + name + "'");

    const Json& basis = result.at("basis");
    const BasisSpec spec = basis_spec_from_json(basis.at("spec"));
    const Matrix transform = matrix_from_json(basis.at("transform"), "basis.transform");
    const Matrix z = evaluate_basis(spec, states);
    if (z.cols() != transform.rows()) {
        throw DimensionError("r", "stored transform expects " + std::to_string(transform.rows()) + " raw features, spec gives " +
                                      std::to_string(z.cols()));
    }
    const HedgeCoefficients xi(matrix_from_json(fits[name].at("coefficients"), "coefficients"),
                               basis.at("basis_id").get<std::string>());
    if (xi.n_basis() != static_cast<std::size_t>(transform.cols())) {
        throw DimensionError("r", "coefficients do not match the stored transform");
    }
    return reconstruct_hedge_values(xi, apply_transform(z, transform));
}

void export_problem(const ProblemData& data, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    io::write_tensor(dir / "A.hrt", io::to_raw(data.a));
    io::write_tensor(dir / "b.hrt", io::to_raw(data.b));
    io::write_tensor(dir / "X.hrt", io::to_raw(data.z));
    if (data.z_test) io::write_tensor(dir / "Y.hrt", io::to_raw(*data.z_test));
    io::write_states_csv(dir / "states.csv", data.states);
}

ProblemData import_problem(const ExperimentConfig& config, const std::filesystem::path& dir) {
    SensitivityTensor a = io::sensitivity_from_raw(io::read_tensor(dir / "A.hrt"));
    PrimitiveSensitivities b = io::primitive_from_raw(io::read_tensor(dir / "b.hrt"));
    Matrix z = io::matrix_from_raw(io::read_tensor(dir / "X.hrt"));
    StateTable states = io::read_states_csv(dir / "states.csv");

    const std::size_t n_paths = config.model.paths;
    if (a.n_paths() != n_paths) {
        throw DimensionError("N", "imported A has " + std::to_string(a.n_paths()) + " paths, config expects " +
                                      std::to_string(n_paths));
    }
    if (a.n_primitives() != config.primitives.size()) throw DimensionError("n", "imported A vs configured primitives");
    if (a.n_instruments() != config.instruments.size()) throw DimensionError("m", "imported A vs configured instruments");
    if (b.n_paths() != n_paths || states.n_paths() != n_paths || static_cast<std::size_t>(z.rows()) != n_paths) {
        throw DimensionError("N", "imported b, X or states disagree with the configured path count");
    }
    if (b.n_primitives() != config.primitives.size()) throw DimensionError("n", "imported b vs configured primitives");
    if (static_cast<std::size_t>(z.cols()) != config.solution_basis.spec.features.size()) {
        throw DimensionError("r", "imported X vs configured solution basis");
    }
    std::optional<Matrix> z_test;
    if (config.test_basis) {
        if (!std::filesystem::exists(dir / "Y.hrt")) throw IoError("missing " + (dir / "Y.hrt").string());
        z_test = io::matrix_from_raw(io::read_tensor(dir / "Y.hrt"));
        if (static_cast<std::size_t>(z_test->rows()) != n_paths) throw DimensionError("N", "imported Y vs config");
        if (static_cast<std::size_t>(z_test->cols()) != config.test_basis->spec.features.size()) {
            throw DimensionError("p", "imported Y vs configured test basis");
        }
    }
    KinkReport kinks = primitive_sensitivities(config.model, config.product, config.primitives, states,
                                               config.kink_band)
                           .kinks;
    return ProblemData{std::move(states), std::move(a), std::move(b), std::move(kinks), std::move(z), std::move(z_test)};
}

}  // namespace hr
