#pragma once

#include "hedgeratio/reduce_ls.hpp"
#include "hedgeratio/reduce_projected.hpp"
#include "hedgeratio/solve.hpp"
#include "hedgeratio/tensors.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hr {

struct ResidualReport {
    /// (1/N) sum_l ||A_l phi_l - b_l||^2
    double full_residual = 0.0;
    /// ||A_l phi_l - b_l|| per path
    std::vector<double> per_path_norms;
    /// ||B z - beta||, when a projected system was supplied
    std::optional<double> projected_residual;
    /// max_{i,s} |<R_i, Y_s>_N|, when a test basis was supplied
    std::optional<double> tested_moments;
    /// max_{j,q} |<R, A X_q e_j>_{N,n}|; zero at the unweighted least-squares solution
    double design_orthogonality = 0.0;
};

/// <u, v>_{N,n} = (1/N) sum_l u_l^T v_l for path-stacked vectors of length N*n.
[[nodiscard]] double pathwise_inner(std::span<const double> u, std::span<const double> v, std::size_t n_primitives);

/// R[(l,i)] = (A_l phi_l - b_l)_i, length N*n.
[[nodiscard]] std::vector<double> pathwise_residuals(const HedgeCoefficients& xi, const SensitivityTensor& a,
                                                     const PrimitiveSensitivities& b, const Matrix& x);

[[nodiscard]] ResidualReport residual_report(const HedgeCoefficients& xi, const SensitivityTensor& a,
                                             const PrimitiveSensitivities& b, const Matrix& x,
                                             const Matrix* y = nullptr, const ProjectedSystem* system = nullptr);

struct PathwiseSolution {
    HedgeRatioMatrix phi;
    std::vector<std::size_t> ranks;
    std::vector<double> conditions;  // infinity on numerically rank-deficient paths
};

/// Minimum-norm least-squares solve of A_l phi_l = b_l on every path.
[[nodiscard]] PathwiseSolution pathwise_oracle_solve(const SensitivityTensor& a, const PrimitiveSensitivities& b,
                                                     double rcond = kDefaultRcond, std::size_t threads = 1);

/// xi[j, q] = <phi_{.j}, X_q>_N on an orthonormal basis.
[[nodiscard]] HedgeCoefficients regress_pathwise(const HedgeRatioMatrix& phi, const BasisMatrix& x);

struct MethodResult {
    std::string method;  // "least_squares", "projected", "regress_pathwise"
    HedgeCoefficients coefficients;
    ResidualReport residuals;
    std::optional<SolveReport> solve;
    double condition_estimate = 0.0;
};

struct ComparisonRecord {
    std::vector<MethodResult> methods;

    [[nodiscard]] const MethodResult& get(const std::string& method) const;
};

struct CompareOptions {
    SolveOptions solve;
    AssemblyOptions assembly;
    std::size_t threads = 1;
};

/// Fits least squares, projected (Galerkin when Y has X's id) and
/// regression-after-pathwise, reporting every residual for each.
[[nodiscard]] ComparisonRecord compare_formulations(const SensitivityTensor& a, const PrimitiveSensitivities& b,
                                                    const BasisMatrix& x, const BasisMatrix& y,
                                                    const RegularizationSpec& reg = {},
                                                    const CompareOptions& options = {});

}  // namespace hr
