#include "hedgeratio/solve.hpp"

#include "hedgeratio/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace hr {
namespace {

void require_finite_matrix(const Matrix& c, const char* what) {
    require_finite({c.data(), static_cast<std::size_t>(c.size())}, what);
}

void require_finite_vector(const Vector& v, const char* what) {
    require_finite({v.data(), static_cast<std::size_t>(v.size())}, what);
}

struct SvdSolve {
    Vector solution;
    std::size_t rank = 0;
    double condition = 0.0;
};

double condition_from(const Eigen::VectorXd& sv, std::size_t rank) {
    if (sv.size() == 0) return std::numeric_limits<double>::infinity();
    if (rank < static_cast<std::size_t>(sv.size()) || sv(sv.size() - 1) == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return sv(0) / sv(sv.size() - 1);
}

std::size_t numerical_rank(const Eigen::VectorXd& sv, double rcond) {
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double cut = rcond * sv(0);
    std::size_t rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > cut) ++rank;
    }
    return rank;
}

struct ThinSvd {
    Eigen::MatrixXd u;
    Eigen::VectorXd sv;
    Eigen::MatrixXd v;
};

// Eigen 3.4.0 BDCSVD occasionally returns wrong singular values on matrices with
// repeated or deflated structure (block-diagonal G from path-indicator bases is one).
// The factorization is checked against m and recomputed with JacobiSVD when it fails.
ThinSvd thin_svd(const Eigen::MatrixXd& m) {
    constexpr auto kFlags = Eigen::ComputeThinU | Eigen::ComputeThinV;
    if (m.size() == 0) return {Eigen::MatrixXd(m.rows(), 0), Eigen::VectorXd(0), Eigen::MatrixXd(m.cols(), 0)};
    Eigen::BDCSVD<Eigen::MatrixXd> bdc(m, kFlags);
    ThinSvd out{bdc.matrixU(), bdc.singularValues(), bdc.matrixV()};
    const double scale = m.cwiseAbs().maxCoeff();
    const double err = (out.u * out.sv.asDiagonal() * out.v.transpose() - m).cwiseAbs().maxCoeff();
    if (err <= 1e-11 * scale) return out;
    Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> jacobi(m, kFlags);
    return {jacobi.matrixU(), jacobi.singularValues(), jacobi.matrixV()};
}

/// Minimum-norm least-squares solution with singular values below rcond * sigma_max truncated.
SvdSolve svd_solve(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs, double rcond) {
    const ThinSvd svd = thin_svd(m);
    const Eigen::VectorXd& sv = svd.sv;
    SvdSolve out;
    out.rank = numerical_rank(sv, rcond);
    out.condition = condition_from(sv, out.rank);
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(sv.size());
    const Eigen::VectorXd utb = svd.u.transpose() * rhs;
    for (std::size_t k = 0; k < out.rank; ++k) {
        coeff(static_cast<Eigen::Index>(k)) = utb(static_cast<Eigen::Index>(k)) / sv(static_cast<Eigen::Index>(k));
    }
    out.solution = svd.v * coeff;
    return out;
}

}  // namespace

std::string_view to_string(SolveMethod method) noexcept {
    switch (method) {
        case SolveMethod::direct: return "direct";
        case SolveMethod::least_squares: return "least-squares";
        case SolveMethod::regularized: return "regularized";
        case SolveMethod::iterative: return "iterative";
    }
    return "unknown";
}

void RegularizationSpec::validate(std::size_t rows, std::size_t cols, double rcond) const {
    if (!std::isfinite(lambda) || lambda < 0.0) throw ConfigError("regularization lambda must be finite and >= 0");
    if (l) {
        if (static_cast<std::size_t>(l->cols()) != cols) {
            throw DimensionError("m*r", "regularization operator L has " + std::to_string(l->cols()) +
                                            " columns, system has " + std::to_string(cols));
        }
        require_finite_matrix(*l, "regularization operator L");
        if (numerical_rank(thin_svd(*l).sv, rcond) < cols) {
            throw ConfigError("regularization operator L is rank deficient");
        }
    }
    if (z0) {
        if (static_cast<std::size_t>(z0->size()) != cols) {
            throw DimensionError("m*r", "prior z0 has length " + std::to_string(z0->size()));
        }
        require_finite_vector(*z0, "prior z0");
    }
    if (w) {
        if (static_cast<std::size_t>(w->cols()) != rows) {
            throw DimensionError("rows", "system weight W has " + std::to_string(w->cols()) +
                                             " columns, system has " + std::to_string(rows) + " rows");
        }
        require_finite_matrix(*w, "system weight W");
    }
}

double condition_estimate(const Matrix& c, double rcond) {
    require_finite_matrix(c, "matrix");
    if (c.size() == 0) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd sv = thin_svd(c).sv;
    return condition_from(sv, numerical_rank(sv, rcond));
}

SolveReport solve_least_squares(const Matrix& c, const Vector& d, const RegularizationSpec& reg,
                                const SolveOptions& options) {
    const auto rows = static_cast<std::size_t>(c.rows());
    const auto cols = static_cast<std::size_t>(c.cols());
    if (static_cast<std::size_t>(d.size()) != rows) {
        throw DimensionError("rows", "matrix has " + std::to_string(rows) + " rows, right-hand side has " +
                                         std::to_string(d.size()));
    }
    if (cols == 0) throw DimensionError("cols", "system has no unknowns");
    require_finite_matrix(c, "system matrix");
    require_finite_vector(d, "right-hand side");
    reg.validate(rows, cols, options.rcond);

    Eigen::MatrixXd wc = c;
    Eigen::VectorXd wd = d;
    if (reg.w) {
        wc = *reg.w * c;
        wd = *reg.w * d;
    }

    SvdSolve s;
    if (reg.lambda > 0.0) {
        const Eigen::MatrixXd l = reg.l ? Eigen::MatrixXd(*reg.l) : Eigen::MatrixXd::Identity(cols, cols);
        const Eigen::VectorXd z0 = reg.z0 ? Eigen::VectorXd(*reg.z0) : Eigen::VectorXd::Zero(cols);
        const double root = std::sqrt(reg.lambda);
        Eigen::MatrixXd stacked(wc.rows() + l.rows(), cols);
        stacked << wc, root * l;
        Eigen::VectorXd rhs(wd.size() + l.rows());
        rhs << wd, root * (l * z0);
        s = svd_solve(stacked, rhs, options.rcond);
    } else {
        s = svd_solve(wc, wd, options.rcond);
    }

    SolveReport report;
    report.solution = s.solution;
    report.residual_norm = (wc * s.solution - wd).norm();
    report.rank = s.rank;
    report.condition_estimate = s.condition;
    if (reg.lambda > 0.0) {
        report.method = SolveMethod::regularized;
    } else if (rows == cols && s.rank == cols) {
        report.method = SolveMethod::direct;
    } else {
        report.method = SolveMethod::least_squares;
    }
    return report;
}

ReducedFit solve_reduced(const NormalSystem& system, const RegularizationSpec& reg, const std::string& basis_id,
                         const SolveOptions& options) {
    const auto cols = static_cast<std::size_t>(system.g.cols());
    if (reg.w) throw ConfigError("a system weight W does not apply to normal equations; use residual weights");
    reg.validate(cols, cols, options.rcond);
    require_finite_matrix(system.g, "normal matrix G");
    require_finite_vector(system.h, "normal right-hand side h");

    Eigen::MatrixXd lhs = system.g;
    Eigen::VectorXd rhs = system.h;
    if (reg.lambda > 0.0) {
        const Eigen::MatrixXd l = reg.l ? Eigen::MatrixXd(*reg.l) : Eigen::MatrixXd::Identity(cols, cols);
        const Eigen::MatrixXd ltl = l.transpose() * l;
        lhs += reg.lambda * ltl;
        if (reg.z0) rhs += reg.lambda * (ltl * *reg.z0);
    }
    const SvdSolve s = svd_solve(lhs, rhs, options.rcond);

    SolveReport report;
    report.solution = s.solution;
    report.residual_norm = (lhs * s.solution - rhs).norm();
    report.rank = s.rank;
    report.condition_estimate = s.condition;
    report.method = reg.lambda > 0.0 ? SolveMethod::regularized
                    : s.rank == cols ? SolveMethod::direct
                                     : SolveMethod::least_squares;
    auto xi = HedgeCoefficients::from_flat({s.solution.data(), cols}, system.maps.n_instruments,
                                           system.maps.n_basis, basis_id);
    return {std::move(xi), std::move(report)};
}

ReducedFit solve_reduced(const ProjectedSystem& system, const RegularizationSpec& reg, const std::string& basis_id,
                         const SolveOptions& options) {
    SolveReport report = solve_least_squares(system.b, system.beta, reg, options);
    const auto cols = static_cast<std::size_t>(system.b.cols());
    if (system.square() && reg.lambda == 0.0 && report.rank < cols && !options.least_squares_fallback) {
        throw SingularSystemError("projected system is square but numerically singular (rank " +
                                  std::to_string(report.rank) + " of " + std::to_string(cols) +
                                  "); use lambda > 0 or least-squares mode");
    }
    auto xi = HedgeCoefficients::from_flat({report.solution.data(), cols}, system.maps.n_instruments,
                                           system.maps.n_basis, basis_id);
    return {std::move(xi), std::move(report)};
}

ReducedFit solve_matrix_free(const SensitivityTensor& a_in, const PrimitiveSensitivities& b_in, const Matrix& x,
                             const RegularizationSpec& reg, const std::string& basis_id, const SolveOptions& options,
                             const ResidualWeights& w) {
    const ProblemDims dims = validate_problem(a_in, b_in, x);
    const std::size_t mr = dims.n_instruments * dims.n_basis;
    if (reg.l) throw ConfigError("matrix-free solve supports only L = identity");
    if (reg.w) throw ConfigError("a system weight W does not apply to the matrix-free path; use residual weights");
    reg.validate(dims.n_paths * dims.n_primitives, mr, options.rcond);
    const auto [a, b] = apply_weights(a_in, b_in, w);

    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(dims.n_paths));
    const double root_lambda = std::sqrt(reg.lambda);
    const std::size_t rows = dims.n_paths * dims.n_primitives;

    // Column scaling: precond[c] = 1 / sqrt(G_cc + lambda).
    Eigen::VectorXd precond(static_cast<Eigen::Index>(mr));
    {
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mr));
        const std::size_t m = dims.n_instruments;
        for (std::size_t l = 0; l < dims.n_paths; ++l) {
            for (std::size_t i = 0; i < dims.n_primitives; ++i) {
                for (std::size_t q = 0; q < dims.n_basis; ++q) {
                    const double xq = x(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(q));
                    for (std::size_t j = 0; j < m; ++j) {
                        const double v = a.at(l, i, j) * xq;
                        diag(static_cast<Eigen::Index>(q * m + j)) += v * v;
                    }
                }
            }
        }
        for (Eigen::Index c = 0; c < precond.size(); ++c) {
            const double g = diag(c) / static_cast<double>(dims.n_paths) + reg.lambda;
            precond(c) = g > 0.0 ? 1.0 / std::sqrt(g) : 1.0;
        }
    }

    // Operator M u = [D P u / sqrt(N); sqrt(lambda) P u], z = P u.
    auto apply_op = [&](const Eigen::VectorXd& u) {
        const Eigen::VectorXd z = precond.cwiseProduct(u);
        const std::vector<double> dz = apply_design({z.data(), mr}, a, x);
        Eigen::VectorXd out(static_cast<Eigen::Index>(rows + (reg.lambda > 0.0 ? mr : 0)));
        for (std::size_t k = 0; k < rows; ++k) out(static_cast<Eigen::Index>(k)) = dz[k] * inv_sqrt_n;
        if (reg.lambda > 0.0) out.tail(static_cast<Eigen::Index>(mr)) = root_lambda * z;
        return out;
    };
    auto apply_adj = [&](const Eigen::VectorXd& v) {
        const std::vector<double> dt = apply_design_adjoint({v.data(), rows}, a, x);
        Eigen::VectorXd out(static_cast<Eigen::Index>(mr));
        for (std::size_t k = 0; k < mr; ++k) out(static_cast<Eigen::Index>(k)) = dt[k] * inv_sqrt_n;
        if (reg.lambda > 0.0) out += root_lambda * v.tail(static_cast<Eigen::Index>(mr));
        return Eigen::VectorXd(precond.cwiseProduct(out));
    };

    Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows + (reg.lambda > 0.0 ? mr : 0)));
    for (std::size_t k = 0; k < rows; ++k) rhs(static_cast<Eigen::Index>(k)) = b.values()[k] * inv_sqrt_n;
    if (reg.lambda > 0.0) {
        rhs.tail(static_cast<Eigen::Index>(mr)) =
            reg.z0 ? Eigen::VectorXd(root_lambda * *reg.z0) : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mr));
    }

    const std::size_t max_iter = options.max_iterations > 0 ? options.max_iterations : 20 * mr + 100;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mr));
    Eigen::VectorXd res = rhs;
    Eigen::VectorXd s = apply_adj(res);
    Eigen::VectorXd dir = s;
    double gamma = s.squaredNorm();
    const double stop = options.tolerance * std::sqrt(gamma);
    std::size_t iter = 0;
    bool converged = std::sqrt(gamma) <= stop || gamma == 0.0;
    while (!converged && iter < max_iter) {
        const Eigen::VectorXd q = apply_op(dir);
        const double qq = q.squaredNorm();
        if (qq == 0.0) break;
        const double alpha = gamma / qq;
        u += alpha * dir;
        res -= alpha * q;
        s = apply_adj(res);
        const double gamma_new = s.squaredNorm();
        ++iter;
        if (std::sqrt(gamma_new) <= stop) {
            converged = true;
            break;
        }
        dir = s + (gamma_new / gamma) * dir;
        gamma = gamma_new;
    }
    if (!converged && std::sqrt(s.squaredNorm()) > stop) {
        throw NumericalError("matrix-free least squares did not converge in " + std::to_string(max_iter) +
                             " iterations");
    }
    require_finite_vector(u, "matrix-free iterate");

    SolveReport report;
    report.solution = precond.cwiseProduct(u);
    const std::vector<double> fit = apply_design({report.solution.data(), mr}, a, x);
    double rn = 0.0;
    for (std::size_t k = 0; k < rows; ++k) {
        const double e = (fit[k] - b.values()[k]) * inv_sqrt_n;
        rn += e * e;
    }
    report.residual_norm = std::sqrt(rn);
    report.rank = mr;
    report.condition_estimate = std::numeric_limits<double>::quiet_NaN();
    report.method = SolveMethod::iterative;
    report.iterations = iter;
    auto xi = HedgeCoefficients::from_flat({report.solution.data(), mr}, dims.n_instruments, dims.n_basis, basis_id);
    return {std::move(xi), std::move(report)};
}

}  // namespace hr
