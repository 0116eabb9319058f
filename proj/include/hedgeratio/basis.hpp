#pragma once

#include "hedgeratio/tensors.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hr {

/// Named per-path state variables (N x k), e.g. S_t, S_T, D_tT.
struct StateTable {
    std::vector<std::string> names;
    Matrix values;

    [[nodiscard]] std::size_t n_paths() const noexcept { return static_cast<std::size_t>(values.rows()); }
    /// Column index of `name`; throws ConfigError if absent.
    [[nodiscard]] std::size_t column(const std::string& name) const;
    [[nodiscard]] bool has(const std::string& name) const;
};

namespace feature {

struct Constant {};

/// ((x - center) / scale)^degree
struct Monomial {
    std::string variable;
    int degree = 1;
    double center = 0.0;
    double scale = 1.0;
};

struct Product {
    std::vector<Monomial> factors;
};

/// 1{x > threshold} when `above`, else 1{x < threshold}.
struct Indicator {
    std::string variable;
    double threshold = 0.0;
    bool above = true;
};

}  // namespace feature

using Feature = std::variant<feature::Constant, feature::Monomial, feature::Product, feature::Indicator>;

struct BasisSpec {
    std::vector<Feature> features;
    /// Information set the features are meant to be measurable with respect to.
    /// Recorded, never checked.
    std::string measurability_tag = "t";

    /// Throws ConfigError on an empty list, negative degree, zero scale or non-finite threshold.
    void validate() const;
    /// Stable textual form; feeds the basis identity hash.
    [[nodiscard]] std::string canonical() const;
    [[nodiscard]] std::vector<std::string> variables() const;
};

/// Raw basis values, the orthonormalizing transform and the orthonormal values.
struct BasisSet {
    BasisMatrix raw;        // Z, N x r
    Matrix transform;       // T, r x r'
    BasisMatrix ortho;      // X = Z T, N x r'
    std::vector<std::size_t> dropped;  // 0-based raw columns removed for rank deficiency
    std::optional<BasisSpec> spec;

    [[nodiscard]] std::size_t size() const noexcept { return ortho.size(); }
    [[nodiscard]] std::size_t raw_size() const noexcept { return raw.size(); }

    /// Evaluates the stored spec and transform on new states. Requires `spec`.
    [[nodiscard]] BasisMatrix evaluate(const StateTable& states) const;
};

/// <U, V>_N = (1/N) sum_l U_l V_l
[[nodiscard]] double empirical_inner(std::span<const double> u, std::span<const double> v);

/// Z[l, q] = q-th feature on path l.
[[nodiscard]] Matrix evaluate_basis(const BasisSpec& spec, const StateTable& states);

/// X = Z T, evaluated path by path in a fixed order so in-sample and
/// out-of-sample evaluation agree bitwise.
[[nodiscard]] Matrix apply_transform(const Matrix& z, const Matrix& t);

inline constexpr double kDefaultDropTol = 1e-8;

/// Modified Gram-Schmidt in the empirical inner product with one
/// reorthogonalization pass. Columns whose remaining norm falls below
/// drop_tol times the largest raw column norm are dropped.
[[nodiscard]] BasisSet orthonormalize(const Matrix& z, double drop_tol = kDefaultDropTol,
                                      std::optional<BasisSpec> spec = std::nullopt);

/// Uses Z as is (T = identity); for fitting in a non-orthonormal basis.
[[nodiscard]] BasisSet raw_basis(const Matrix& z, std::optional<BasisSpec> spec = std::nullopt);

/// Empirical Gram matrix, entry (k, q) = <Z_k, Z_q>_N.
[[nodiscard]] Matrix gram(const Matrix& z);

struct Projection {
    std::vector<double> coefficients;
    std::vector<double> fitted;
};

/// Empirical orthogonal projection of U onto the span of an orthonormal basis X.
[[nodiscard]] Projection project(std::span<const double> u, const Matrix& x);

}  // namespace hr
