#pragma once

#include "hedgeratio/parallel.hpp"
#include "hedgeratio/tensors.hpp"

#include <span>
#include <string>
#include <vector>

namespace hr {

/// Metric in primitive-sensitivity space: none (identity), one shared n x n
/// matrix, or one matrix per path.
class ResidualWeights {
public:
    enum class Kind { identity, shared, per_path };

    ResidualWeights() = default;
    static ResidualWeights shared(Matrix w);
    static ResidualWeights per_path(std::vector<Matrix> w);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] std::string tag() const;
    /// Throws DimensionError unless each W_l is n x n (and one per path).
    void validate(std::size_t n_paths, std::size_t n_primitives) const;
    /// W_l for path l; identity kind is never asked.
    [[nodiscard]] const Matrix& at(std::size_t l) const;

private:
    Kind kind_ = Kind::identity;
    std::vector<Matrix> w_;
};

/// Flattened normal equations G z = h of the empirical L2 problem.
struct NormalSystem {
    Matrix g;   // mr x mr, rows and columns ordered by col(j, q)
    Vector h;   // mr
    FlatIndexMaps maps;
    std::string weight_tag = "identity";
    std::size_t n_paths = 0;
};

/// G[(j,q),(k,p)] = (1/N) sum_l sum_i (WA)_lij (WA)_lik X_lq X_lp
/// h[(j,q)]       = (1/N) sum_l sum_i (WA)_lij (Wb)_li X_lq
[[nodiscard]] NormalSystem assemble_normal(const SensitivityTensor& a, const PrimitiveSensitivities& b, const Matrix& x,
                                           const ResidualWeights& w = {}, const AssemblyOptions& options = {});

/// (D z)[(l,i)] = sum_{j,q} A_lij X_lq z[(j,q)], without forming D. Length N*n.
[[nodiscard]] std::vector<double> apply_design(std::span<const double> z, const SensitivityTensor& a, const Matrix& x);

/// D^T v, length m*r.
[[nodiscard]] std::vector<double> apply_design_adjoint(std::span<const double> v, const SensitivityTensor& a,
                                                       const Matrix& x);

/// (1/N) sum_l || W_l (A_l phi_l - b_l) ||^2 for phi reconstructed from xi on X.
[[nodiscard]] double ls_objective(const HedgeCoefficients& xi, const SensitivityTensor& a,
                                  const PrimitiveSensitivities& b, const Matrix& x, const ResidualWeights& w = {});

/// (W_l A_l, W_l b_l) on every path; identity weights return copies.
[[nodiscard]] std::pair<SensitivityTensor, PrimitiveSensitivities> apply_weights(const SensitivityTensor& a,
                                                                                 const PrimitiveSensitivities& b,
                                                                                 const ResidualWeights& w);

}  // namespace hr
