#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hr {

/// Dense row-major matrix. Rows of path-indexed matrices are contiguous per path.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Pathwise hedge-instrument sensitivities A[l, i, j] = dP_j / dM_i on path l.
///
/// Stored path-major: the n x m block of path l is contiguous, row i of that
/// block (all instruments for primitive i) is contiguous. Immutable after
/// construction; construction rejects non-finite entries.
class SensitivityTensor {
public:
    SensitivityTensor(std::size_t n_paths, std::size_t n_primitives, std::size_t n_instruments,
                      std::vector<double> values);

    /// Same A_l on every path.
    static SensitivityTensor deterministic(std::size_t n_paths, const Matrix& a0);

    [[nodiscard]] std::size_t n_paths() const noexcept { return n_paths_; }
    [[nodiscard]] std::size_t n_primitives() const noexcept { return n_primitives_; }
    [[nodiscard]] std::size_t n_instruments() const noexcept { return n_instruments_; }

    [[nodiscard]] double at(std::size_t l, std::size_t i, std::size_t j) const noexcept {
        return values_[(l * n_primitives_ + i) * n_instruments_ + j];
    }
    /// Row i of A_l, length m.
    [[nodiscard]] std::span<const double> row(std::size_t l, std::size_t i) const noexcept {
        return {values_.data() + (l * n_primitives_ + i) * n_instruments_, n_instruments_};
    }
    /// A_l as an n x m row-major block.
    [[nodiscard]] std::span<const double> path(std::size_t l) const noexcept {
        return {values_.data() + l * n_primitives_ * n_instruments_, n_primitives_ * n_instruments_};
    }
    [[nodiscard]] Matrix path_matrix(std::size_t l) const;
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t n_paths_;
    std::size_t n_primitives_;
    std::size_t n_instruments_;
    std::vector<double> values_;
};

/// Pathwise primitive sensitivities b[l, i] = dV / dM_i on path l (N x n).
class PrimitiveSensitivities {
public:
    PrimitiveSensitivities(std::size_t n_paths, std::size_t n_primitives, std::vector<double> values);
    explicit PrimitiveSensitivities(const Matrix& values);

    [[nodiscard]] std::size_t n_paths() const noexcept { return n_paths_; }
    [[nodiscard]] std::size_t n_primitives() const noexcept { return n_primitives_; }
    [[nodiscard]] double at(std::size_t l, std::size_t i) const noexcept {
        return values_[l * n_primitives_ + i];
    }
    [[nodiscard]] std::span<const double> path(std::size_t l) const noexcept {
        return {values_.data() + l * n_primitives_, n_primitives_};
    }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t n_paths_;
    std::size_t n_primitives_;
    std::vector<double> values_;
};

/// Path values of a set of basis functions (N x r) tagged with an identity.
struct BasisMatrix {
    Matrix values;
    std::string id;

    /// Tags `values` with a content hash.
    static BasisMatrix wrap(Matrix values);

    [[nodiscard]] std::size_t n_paths() const noexcept { return static_cast<std::size_t>(values.rows()); }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// Coefficients xi[j, q] of the hedge ansatz phi_j = sum_q xi[j, q] X_q.
class HedgeCoefficients {
public:
    HedgeCoefficients(Matrix values, std::string basis_id);

    /// Unflattens z with col(j, q) = q*m + j (0-based).
    static HedgeCoefficients from_flat(std::span<const double> z, std::size_t n_instruments,
                                       std::size_t n_basis, std::string basis_id);

    [[nodiscard]] std::size_t n_instruments() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    [[nodiscard]] std::size_t n_basis() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    [[nodiscard]] double at(std::size_t j, std::size_t q) const noexcept {
        return values_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q));
    }
    [[nodiscard]] const Matrix& values() const noexcept { return values_; }
    [[nodiscard]] const std::string& basis_id() const noexcept { return basis_id_; }
    [[nodiscard]] std::vector<double> flat() const;

private:
    Matrix values_;
    std::string basis_id_;
};

/// phi[l, j], N x m.
struct HedgeRatioMatrix {
    Matrix values;

    [[nodiscard]] std::size_t n_paths() const noexcept { return static_cast<std::size_t>(values.rows()); }
    [[nodiscard]] std::size_t n_instruments() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

/// Flattening of (primitive i, test s) rows and (instrument j, basis q) columns.
///
/// Public maps are 1-based: row(i, s) = (s-1)*n + i, col(j, q) = (q-1)*m + j.
/// The *0 variants give the same ordering 0-based.
struct FlatIndexMaps {
    std::size_t n_primitives = 0;
    std::size_t n_tests = 0;
    std::size_t n_instruments = 0;
    std::size_t n_basis = 0;

    [[nodiscard]] std::size_t rows() const noexcept { return n_primitives * n_tests; }
    [[nodiscard]] std::size_t cols() const noexcept { return n_instruments * n_basis; }

    [[nodiscard]] std::size_t row(std::size_t i, std::size_t s) const;
    [[nodiscard]] std::size_t col(std::size_t j, std::size_t q) const;

    [[nodiscard]] std::size_t row0(std::size_t i, std::size_t s) const noexcept { return s * n_primitives + i; }
    [[nodiscard]] std::size_t col0(std::size_t j, std::size_t q) const noexcept { return q * n_instruments + j; }

    /// Inverse of row(): 1-based (i, s).
    [[nodiscard]] std::pair<std::size_t, std::size_t> row_index(std::size_t flat) const;
    /// Inverse of col(): 1-based (j, q).
    [[nodiscard]] std::pair<std::size_t, std::size_t> col_index(std::size_t flat) const;
};

[[nodiscard]] std::size_t flatten_row(std::size_t i, std::size_t s, std::size_t n);
[[nodiscard]] std::size_t flatten_col(std::size_t j, std::size_t q, std::size_t m);

struct ProblemDims {
    std::size_t n_paths = 0;
    std::size_t n_primitives = 0;
    std::size_t n_instruments = 0;
    std::size_t n_basis = 0;
    std::size_t n_tests = 0;  // 0 when no test basis was supplied
};

/// Cross-checks the path count and primitive count of all inputs.
/// Throws DimensionError naming the axis, or NonFiniteError for basis values.
ProblemDims validate_problem(const SensitivityTensor& a, const PrimitiveSensitivities& b, const Matrix& x,
                             const Matrix* y = nullptr);

/// phi[l, j] = sum_q xi[j, q] X[l, q]. Throws BasisMismatchError if the ids differ.
[[nodiscard]] HedgeRatioMatrix reconstruct_hedge(const HedgeCoefficients& xi, const BasisMatrix& x);

/// Unchecked-id variant for internal callers that already hold matching values.
[[nodiscard]] HedgeRatioMatrix reconstruct_hedge_values(const HedgeCoefficients& xi, const Matrix& x);

/// Throws NonFiniteError at the first NaN/Inf.
void require_finite(std::span<const double> values, const std::string& where);

}  // namespace hr
