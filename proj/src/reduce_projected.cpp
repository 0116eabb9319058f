#include "hedgeratio/reduce_projected.hpp"

#include "hedgeratio/error.hpp"
#include "hedgeratio/simd.hpp"

namespace hr {

ProjectedSystem assemble_projected(const SensitivityTensor& a, const PrimitiveSensitivities& b, const Matrix& x,
                                   const Matrix& y, std::string test_basis_id, const AssemblyOptions& options) {
    const ProblemDims dims = validate_problem(a, b, x, &y);
    const std::size_t n = dims.n_primitives;
    const std::size_t m = dims.n_instruments;
    const std::size_t r = dims.n_basis;
    const std::size_t p = dims.n_tests;
    const std::size_t mr = m * r;
    const std::size_t np = n * p;
    const auto& k = simd::active();

    // Buffer layout: B (row-major np x mr), then beta.
    auto accumulate = [&](std::size_t first, std::size_t last, std::span<double> buf) {
        std::vector<double> u(mr);
        double* bmat = buf.data();
        double* beta = buf.data() + np * mr;
        for (std::size_t l = first; l < last; ++l) {
            const double* xl = x.data() + l * r;
            const double* yl = y.data() + l * p;
            for (std::size_t i = 0; i < n; ++i) {
                const double* ai = a.row(l, i).data();
                for (std::size_t q = 0; q < r; ++q) k.scale(xl[q], ai, u.data() + q * m, m);
                const double bi = b.at(l, i);
                for (std::size_t s = 0; s < p; ++s) {
                    if (yl[s] == 0.0) continue;
                    const std::size_t row = s * n + i;
                    k.axpy(yl[s], u.data(), bmat + row * mr, mr);
                    beta[row] += bi * yl[s];
                }
            }
        }
    };
    std::vector<double> buf = reduce_over_paths(dims.n_paths, np * mr + np, options, accumulate);
    require_finite(buf, "projected-system accumulation");

    const double inv_n = 1.0 / static_cast<double>(dims.n_paths);
    ProjectedSystem out;
    out.b.resize(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(mr));
    out.beta.resize(static_cast<Eigen::Index>(np));
    for (std::size_t row = 0; row < np; ++row) {
        for (std::size_t c = 0; c < mr; ++c) {
            out.b(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)) = buf[row * mr + c] * inv_n;
        }
        out.beta(static_cast<Eigen::Index>(row)) = buf[np * mr + row] * inv_n;
    }
    out.maps = FlatIndexMaps{n, p, m, r};
    out.test_basis_id = std::move(test_basis_id);
    return out;
}

ProjectedSystem assemble_galerkin(const SensitivityTensor& a, const PrimitiveSensitivities& b, const Matrix& x,
                                  std::string basis_id, const AssemblyOptions& options) {
    return assemble_projected(a, b, x, x, std::move(basis_id), options);
}

}  // namespace hr
