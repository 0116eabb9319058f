#pragma once

#include "hedgeratio/parallel.hpp"
#include "hedgeratio/tensors.hpp"

#include <string>

namespace hr {

/// Flattened projected moment system B z = beta.
struct ProjectedSystem {
    Matrix b;      // np x mr, rows by row(i, s), columns by col(j, q)
    Vector beta;   // np
    FlatIndexMaps maps;
    std::string test_basis_id;

    [[nodiscard]] bool square() const noexcept { return b.rows() == b.cols(); }
};

/// B[(i,s),(j,q)] = (1/N) sum_l A_lij X_lq Y_ls,  beta[(i,s)] = (1/N) sum_l b_li Y_ls.
/// X need not be orthonormal.
[[nodiscard]] ProjectedSystem assemble_projected(const SensitivityTensor& a, const PrimitiveSensitivities& b,
                                                 const Matrix& x, const Matrix& y, std::string test_basis_id = {},
                                                 const AssemblyOptions& options = {});

/// assemble_projected with Y = X.
[[nodiscard]] ProjectedSystem assemble_galerkin(const SensitivityTensor& a, const PrimitiveSensitivities& b,
                                                const Matrix& x, std::string basis_id = {},
                                                const AssemblyOptions& options = {});

}  // namespace hr
