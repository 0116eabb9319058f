#pragma once

#include "hedgeratio/reduce_ls.hpp"
#include "hedgeratio/reduce_projected.hpp"
#include "hedgeratio/tensors.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace hr {

/// argmin ||W (C z - d)||^2 + lambda ||L (z - z0)||^2.
/// Unset L, z0 and W mean identity, zero and identity.
struct RegularizationSpec {
    double lambda = 0.0;
    std::optional<Matrix> l;
    std::optional<Vector> z0;
    std::optional<Matrix> w;

    /// Checks lambda, shapes against a rows x cols system, and full column rank of L.
    void validate(std::size_t rows, std::size_t cols, double rcond) const;
};

enum class SolveMethod { direct, least_squares, regularized, iterative };

std::string_view to_string(SolveMethod method) noexcept;

struct SolveReport {
    Vector solution;
    double residual_norm = 0.0;       // ||W (C z - d)||
    std::size_t rank = 0;
    double condition_estimate = 0.0;  // infinity when numerically rank deficient
    SolveMethod method = SolveMethod::direct;
    std::size_t iterations = 0;       // iterative solves only
};

inline constexpr double kDefaultRcond = 1e-12;

struct SolveOptions {
    /// Singular values below rcond * sigma_max count as zero.
    double rcond = kDefaultRcond;
    /// Square projected systems that are singular fall back to minimum-norm
    /// least squares instead of throwing.
    bool least_squares_fallback = false;
    /// Matrix-free: stop when ||gradient|| <= tolerance * ||initial gradient||.
    double tolerance = 1e-13;
    /// Matrix-free iteration cap; 0 means 20 * unknowns + 100.
    std::size_t max_iterations = 0;
};

/// 2-norm condition number sigma_max / sigma_min over min(rows, cols)
/// singular values; infinity when the matrix is numerically rank deficient.
[[nodiscard]] double condition_estimate(const Matrix& c, double rcond = kDefaultRcond);

/// Tikhonov-regularized least squares through an SVD of the stacked system.
/// With lambda = 0 and rank-deficient C this is the minimum-norm solution.
[[nodiscard]] SolveReport solve_least_squares(const Matrix& c, const Vector& d, const RegularizationSpec& reg = {},
                                              const SolveOptions& options = {});

struct ReducedFit {
    HedgeCoefficients coefficients;
    SolveReport report;
};

/// Empirical L2 fit from its normal equations: (G + lambda L^T L) z = h + lambda L^T L z0.
[[nodiscard]] ReducedFit solve_reduced(const NormalSystem& system, const RegularizationSpec& reg,
                                       const std::string& basis_id, const SolveOptions& options = {});

/// Projected fit. Square nonsingular systems are solved directly; others as
/// (regularized) least squares on B z = beta.
[[nodiscard]] ReducedFit solve_reduced(const ProjectedSystem& system, const RegularizationSpec& reg,
                                       const std::string& basis_id, const SolveOptions& options = {});

/// Empirical L2 fit without forming G: preconditioned CGLS on
/// (1/N)||D z - y||^2 + lambda ||z - z0||^2 using apply_design / apply_design_adjoint.
/// Only L = identity is supported.
[[nodiscard]] ReducedFit solve_matrix_free(const SensitivityTensor& a, const PrimitiveSensitivities& b,
                                           const Matrix& x, const RegularizationSpec& reg,
                                           const std::string& basis_id, const SolveOptions& options = {},
                                           const ResidualWeights& w = {});

}  // namespace hr
