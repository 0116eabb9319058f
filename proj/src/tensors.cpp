#include "hedgeratio/tensors.hpp"

#include "hedgeratio/error.hpp"
#include "hedgeratio/hash.hpp"
#include "hedgeratio/simd.hpp"

#include <cmath>

namespace hr {

void require_finite(std::span<const double> values, const std::string& where) {
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k])) throw NonFiniteError(where, k);
    }
}

namespace {

void require_positive(std::size_t v, const char* axis) {
    if (v == 0) throw DimensionError(axis, "must be at least 1");
}

std::span<const double> as_span(const Matrix& m) {
    return {m.data(), static_cast<std::size_t>(m.size())};
}

}  // namespace

SensitivityTensor::SensitivityTensor(std::size_t n_paths, std::size_t n_primitives, std::size_t n_instruments,
                                     std::vector<double> values)
    : n_paths_(n_paths), n_primitives_(n_primitives), n_instruments_(n_instruments), values_(std::move(values)) {
    require_positive(n_paths, "N");
    require_positive(n_primitives, "n");
    require_positive(n_instruments, "m");
    if (values_.size() != n_paths * n_primitives * n_instruments) {
        throw DimensionError("N*n*m", "sensitivity tensor holds " + std::to_string(values_.size()) +
                                          " values, expected " +
                                          std::to_string(n_paths * n_primitives * n_instruments));
    }
    require_finite(values_, "sensitivity tensor A");
}

SensitivityTensor SensitivityTensor::deterministic(std::size_t n_paths, const Matrix& a0) {
    const auto n = static_cast<std::size_t>(a0.rows());
    const auto m = static_cast<std::size_t>(a0.cols());
    std::vector<double> values;
    values.reserve(n_paths * n * m);
    for (std::size_t l = 0; l < n_paths; ++l) values.insert(values.end(), a0.data(), a0.data() + n * m);
    return SensitivityTensor(n_paths, n, m, std::move(values));
}

Matrix SensitivityTensor::path_matrix(std::size_t l) const {
    Matrix out(static_cast<Eigen::Index>(n_primitives_), static_cast<Eigen::Index>(n_instruments_));
    const auto block = path(l);
    std::copy(block.begin(), block.end(), out.data());
    return out;
}

PrimitiveSensitivities::PrimitiveSensitivities(std::size_t n_paths, std::size_t n_primitives,
                                               std::vector<double> values)
    : n_paths_(n_paths), n_primitives_(n_primitives), values_(std::move(values)) {
    require_positive(n_paths, "N");
    require_positive(n_primitives, "n");
    if (values_.size() != n_paths * n_primitives) {
        throw DimensionError("N*n", "primitive sensitivities hold " + std::to_string(values_.size()) +
                                        " values, expected " + std::to_string(n_paths * n_primitives));
    }
    require_finite(values_, "primitive sensitivities b");
}

PrimitiveSensitivities::PrimitiveSensitivities(const Matrix& values)
    : PrimitiveSensitivities(static_cast<std::size_t>(values.rows()), static_cast<std::size_t>(values.cols()),
                             std::vector<double>(values.data(), values.data() + values.size())) {}

BasisMatrix BasisMatrix::wrap(Matrix values) {
    ContentHash h;
    h.update("matrix");
    h.update(static_cast<std::uint64_t>(values.rows()));
    h.update(static_cast<std::uint64_t>(values.cols()));
    h.update(as_span(values));
    return BasisMatrix{std::move(values), "m-" + h.hex()};
}

HedgeCoefficients::HedgeCoefficients(Matrix values, std::string basis_id)
    : values_(std::move(values)), basis_id_(std::move(basis_id)) {
    require_finite(as_span(values_), "hedge coefficients");
}

HedgeCoefficients HedgeCoefficients::from_flat(std::span<const double> z, std::size_t n_instruments,
                                               std::size_t n_basis, std::string basis_id) {
    if (z.size() != n_instruments * n_basis) {
        throw DimensionError("m*r", "flat coefficient vector has length " + std::to_string(z.size()));
    }
    Matrix values(static_cast<Eigen::Index>(n_instruments), static_cast<Eigen::Index>(n_basis));
    for (std::size_t q = 0; q < n_basis; ++q) {
        for (std::size_t j = 0; j < n_instruments; ++j) {
            values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q)) = z[q * n_instruments + j];
        }
    }
    return HedgeCoefficients(std::move(values), std::move(basis_id));
}

std::vector<double> HedgeCoefficients::flat() const {
    const std::size_t m = n_instruments();
    std::vector<double> z(m * n_basis());
    for (std::size_t q = 0; q < n_basis(); ++q) {
        for (std::size_t j = 0; j < m; ++j) z[q * m + j] = at(j, q);
    }
    return z;
}

std::size_t flatten_row(std::size_t i, std::size_t s, std::size_t n) {
    if (n == 0 || i < 1 || i > n) throw IndexError("flatten_row: primitive index out of range");
    if (s < 1) throw IndexError("flatten_row: test index must be >= 1");
    return (s - 1) * n + i;
}

std::size_t flatten_col(std::size_t j, std::size_t q, std::size_t m) {
    if (m == 0 || j < 1 || j > m) throw IndexError("flatten_col: instrument index out of range");
    if (q < 1) throw IndexError("flatten_col: basis index must be >= 1");
    return (q - 1) * m + j;
}

std::size_t FlatIndexMaps::row(std::size_t i, std::size_t s) const {
    if (s > n_tests) throw IndexError("row map: test index out of range");
    return flatten_row(i, s, n_primitives);
}

std::size_t FlatIndexMaps::col(std::size_t j, std::size_t q) const {
    if (q > n_basis) throw IndexError("col map: basis index out of range");
    return flatten_col(j, q, n_instruments);
}

std::pair<std::size_t, std::size_t> FlatIndexMaps::row_index(std::size_t flat) const {
    if (flat < 1 || flat > rows()) throw IndexError("row map: flat index out of range");
    return {(flat - 1) % n_primitives + 1, (flat - 1) / n_primitives + 1};
}

std::pair<std::size_t, std::size_t> FlatIndexMaps::col_index(std::size_t flat) const {
    if (flat < 1 || flat > cols()) throw IndexError("col map: flat index out of range");
    return {(flat - 1) % n_instruments + 1, (flat - 1) / n_instruments + 1};
}

ProblemDims validate_problem(const SensitivityTensor& a, const PrimitiveSensitivities& b, const Matrix& x,
                             const Matrix* y) {
    const std::size_t n_paths = a.n_paths();
    if (b.n_paths() != n_paths) {
        throw DimensionError("N", "A has " + std::to_string(n_paths) + " paths, b has " +
                                      std::to_string(b.n_paths()));
    }
    if (static_cast<std::size_t>(x.rows()) != n_paths) {
        throw DimensionError("N", "A has " + std::to_string(n_paths) + " paths, X has " +
                                      std::to_string(x.rows()));
    }
    if (b.n_primitives() != a.n_primitives()) {
        throw DimensionError("n", "A has " + std::to_string(a.n_primitives()) + " primitives, b has " +
                                      std::to_string(b.n_primitives()));
    }
    if (x.cols() < 1) throw DimensionError("r", "solution basis is empty");
    require_finite(as_span(x), "solution basis X");
    ProblemDims dims{n_paths, a.n_primitives(), a.n_instruments(), static_cast<std::size_t>(x.cols()), 0};
    if (y != nullptr) {
        if (static_cast<std::size_t>(y->rows()) != n_paths) {
            throw DimensionError("N", "A has " + std::to_string(n_paths) + " paths, Y has " +
                                          std::to_string(y->rows()));
        }
        if (y->cols() < 1) throw DimensionError("p", "test basis is empty");
        require_finite(as_span(*y), "test basis Y");
        dims.n_tests = static_cast<std::size_t>(y->cols());
    }
    return dims;
}

HedgeRatioMatrix reconstruct_hedge_values(const HedgeCoefficients& xi, const Matrix& x) {
    const std::size_t r = xi.n_basis();
    const std::size_t m = xi.n_instruments();
    if (static_cast<std::size_t>(x.cols()) != r) {
        throw DimensionError("r", "coefficients have " + std::to_string(r) + " basis functions, X has " +
                                      std::to_string(x.cols()));
    }
    const auto n_paths = static_cast<std::size_t>(x.rows());
    const std::vector<double> z = xi.flat();
    const auto& k = simd::active();
    HedgeRatioMatrix phi{Matrix::Zero(static_cast<Eigen::Index>(n_paths), static_cast<Eigen::Index>(m))};
    for (std::size_t l = 0; l < n_paths; ++l) {
        double* out = phi.values.data() + l * m;
        const double* xl = x.data() + l * r;
        for (std::size_t q = 0; q < r; ++q) k.axpy(xl[q], z.data() + q * m, out, m);
    }
    return phi;
}

HedgeRatioMatrix reconstruct_hedge(const HedgeCoefficients& xi, const BasisMatrix& x) {
    if (xi.basis_id() != x.id) {
        throw BasisMismatchError("coefficients were fitted on basis '" + xi.basis_id() +
                                 "' but reconstruction was given basis '" + x.id + "'");
    }
    return reconstruct_hedge_values(xi, x.values);
}

}  // namespace hr
