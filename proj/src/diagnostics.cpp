#include "hedgeratio/diagnostics.hpp"

#include "hedgeratio/basis.hpp"
#include "hedgeratio/error.hpp"
#include "hedgeratio/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hr {

double pathwise_inner(std::span<const double> u, std::span<const double> v, std::size_t n_primitives) {
    if (u.size() != v.size()) throw DimensionError("N*n", "pathwise inner product of unequal lengths");
    if (n_primitives == 0 || u.size() % n_primitives != 0 || u.empty()) {
        throw DimensionError("n", "vector length is not a positive multiple of n");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) sum += u[k] * v[k];
    return sum / static_cast<double>(u.size() / n_primitives);
}

std::vector<double> pathwise_residuals(const HedgeCoefficients& xi, const SensitivityTensor& a,
                                       const PrimitiveSensitivities& b, const Matrix& x) {
    const ProblemDims dims = validate_problem(a, b, x);
    if (xi.n_instruments() != dims.n_instruments || xi.n_basis() != dims.n_basis) {
        throw DimensionError("m*r", "coefficients do not match (A, X)");
    }
    std::vector<double> r = apply_design(xi.flat(), a, x);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= b.values()[k];
    return r;
}

ResidualReport residual_report(const HedgeCoefficients& xi, const SensitivityTensor& a,
                               const PrimitiveSensitivities& b, const Matrix& x, const Matrix* y,
                               const ProjectedSystem* system) {
    const ProblemDims dims = validate_problem(a, b, x, y);
    const std::vector<double> r = pathwise_residuals(xi, a, b, x);
    const std::size_t n = dims.n_primitives;

    ResidualReport out;
    out.per_path_norms.resize(dims.n_paths);
    double total = 0.0;
    for (std::size_t l = 0; l < dims.n_paths; ++l) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += r[l * n + i] * r[l * n + i];
        out.per_path_norms[l] = std::sqrt(s);
        total += s;
    }
    out.full_residual = total / static_cast<double>(dims.n_paths);

    const std::vector<double> grad = apply_design_adjoint(r, a, x);
    for (double g : grad) {
        out.design_orthogonality = std::max(out.design_orthogonality, std::abs(g) / static_cast<double>(dims.n_paths));
    }

    if (y != nullptr) {
        double worst = 0.0;
        std::vector<double> ri(dims.n_paths);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t l = 0; l < dims.n_paths; ++l) ri[l] = r[l * n + i];
            for (Eigen::Index s = 0; s < y->cols(); ++s) {
                const Eigen::VectorXd ys = y->col(s);
                worst = std::max(worst, std::abs(empirical_inner(ri, {ys.data(), dims.n_paths})));
            }
        }
        out.tested_moments = worst;
    }
    if (system != nullptr) {
        const std::vector<double> z = xi.flat();
        if (static_cast<std::size_t>(system->b.cols()) != z.size()) {
            throw DimensionError("m*r", "projected system does not match coefficients");
        }
        const Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
        out.projected_residual = (system->b * zv - system->beta).norm();
    }
    return out;
}

PathwiseSolution pathwise_oracle_solve(const SensitivityTensor& a, const PrimitiveSensitivities& b, double rcond,
                                       std::size_t threads) {
    if (b.n_paths() != a.n_paths()) throw DimensionError("N", "A and b path counts differ");
    if (b.n_primitives() != a.n_primitives()) throw DimensionError("n", "A and b primitive counts differ");
    const std::size_t n_paths = a.n_paths();
    const std::size_t n = a.n_primitives();
    const std::size_t m = a.n_instruments();

    PathwiseSolution out;
    out.phi.values = Matrix::Zero(static_cast<Eigen::Index>(n_paths), static_cast<Eigen::Index>(m));
    out.ranks.assign(n_paths, 0);
    out.conditions.assign(n_paths, 0.0);
    SolveOptions options;
    options.rcond = rcond;
    parallel_for_paths(n_paths, threads, [&](std::size_t first, std::size_t last) {
        Vector bl(static_cast<Eigen::Index>(n));
        for (std::size_t l = first; l < last; ++l) {
            const auto bs = b.path(l);
            for (std::size_t i = 0; i < n; ++i) bl(static_cast<Eigen::Index>(i)) = bs[i];
            const SolveReport rep = solve_least_squares(a.path_matrix(l), bl, {}, options);
            out.phi.values.row(static_cast<Eigen::Index>(l)) = rep.solution.transpose();
            out.ranks[l] = rep.rank;
            out.conditions[l] = rep.condition_estimate;
        }
    });
    return out;
}

HedgeCoefficients regress_pathwise(const HedgeRatioMatrix& phi, const BasisMatrix& x) {
    if (phi.n_paths() != x.n_paths()) {
        throw DimensionError("N", "hedge ratios have " + std::to_string(phi.n_paths()) + " paths, basis has " +
                                      std::to_string(x.n_paths()));
    }
    const std::size_t n_paths = phi.n_paths();
    const Eigen::MatrixXd pc = phi.values;
    const Eigen::MatrixXd xc = x.values;
    Matrix xi(static_cast<Eigen::Index>(phi.n_instruments()), static_cast<Eigen::Index>(x.size()));
    for (Eigen::Index j = 0; j < xi.rows(); ++j) {
        for (Eigen::Index q = 0; q < xi.cols(); ++q) {
            xi(j, q) = empirical_inner({pc.col(j).data(), n_paths}, {xc.col(q).data(), n_paths});
        }
    }
    return HedgeCoefficients(std::move(xi), x.id);
}

const MethodResult& ComparisonRecord::get(const std::string& method) const {
    for (const auto& m : methods) {
        if (m.method == method) return m;
    }
    throw ConfigError("comparison record has no method '" + method + "'");
}

ComparisonRecord compare_formulations(const SensitivityTensor& a, const PrimitiveSensitivities& b,
                                      const BasisMatrix& x, const BasisMatrix& y, const RegularizationSpec& reg,
                                      const CompareOptions& options) {
    validate_problem(a, b, x.values, &y.values);
    const NormalSystem normal = assemble_normal(a, b, x.values, {}, options.assembly);
    const ProjectedSystem projected = assemble_projected(a, b, x.values, y.values, y.id, options.assembly);

    ComparisonRecord record;
    auto add = [&](std::string method, HedgeCoefficients xi, std::optional<SolveReport> solve, double cond) {
        ResidualReport res = residual_report(xi, a, b, x.values, &y.values, &projected);
        record.methods.push_back(MethodResult{std::move(method), std::move(xi), std::move(res), std::move(solve), cond});
    };

    ReducedFit ls = solve_reduced(normal, reg, x.id, options.solve);
    add("least_squares", std::move(ls.coefficients), std::move(ls.report), condition_estimate(normal.g, options.solve.rcond));

    SolveOptions proj_options = options.solve;
    proj_options.least_squares_fallback = true;
    ReducedFit pg = solve_reduced(projected, reg, x.id, proj_options);
    add("projected", std::move(pg.coefficients), std::move(pg.report), condition_estimate(projected.b, options.solve.rcond));

    const PathwiseSolution path = pathwise_oracle_solve(a, b, options.solve.rcond, options.threads);
    double worst = 0.0;
    for (double c : path.conditions) worst = std::max(worst, c);
    add("regress_pathwise", regress_pathwise(path.phi, x), std::nullopt, worst);
    return record;
}

}  // namespace hr
