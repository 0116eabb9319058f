#pragma once

// Brute-force reference constructions for tests. Nothing here calls the
// library's assembly or solve code.

#include "hedgeratio/tensors.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace hr::test {

struct Instance {
    SensitivityTensor a;
    PrimitiveSensitivities b;
    Matrix x;
};

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t count, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(count);
    for (auto& e : v) e = u(rng);
    return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::uniform_real_distribution<double> u(lo, hi);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

inline SensitivityTensor random_tensor(std::mt19937_64& rng, std::size_t n_paths, std::size_t n, std::size_t m) {
    return SensitivityTensor(n_paths, n, m, random_values(rng, n_paths * n * m));
}

inline PrimitiveSensitivities random_primitive(std::mt19937_64& rng, std::size_t n_paths, std::size_t n) {
    return PrimitiveSensitivities(n_paths, n, random_values(rng, n_paths * n));
}

/// Dense design matrix D[(l*n + i), (q*m + j)] = A_lij X_lq.
inline Eigen::MatrixXd design(const SensitivityTensor& a, const Matrix& x) {
    const auto n_paths = a.n_paths();
    const auto n = a.n_primitives();
    const auto m = a.n_instruments();
    const auto r = static_cast<std::size_t>(x.cols());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_paths * n), static_cast<Eigen::Index>(m * r));
    for (std::size_t l = 0; l < n_paths; ++l)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t q = 0; q < r; ++q)
                for (std::size_t j = 0; j < m; ++j)
                    d(static_cast<Eigen::Index>(l * n + i), static_cast<Eigen::Index>(q * m + j)) =
                        a.at(l, i, j) * x(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(q));
    return d;
}

inline Eigen::VectorXd stacked(const PrimitiveSensitivities& b) {
    return Eigen::Map<const Eigen::VectorXd>(b.values().data(), static_cast<Eigen::Index>(b.values().size()));
}

/// Projected system by triple loop: B[(s*n + i), (q*m + j)] = (1/N) sum_l A_lij X_lq Y_ls.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> projected(const SensitivityTensor& a, const PrimitiveSensitivities& b,
                                                             const Matrix& x, const Matrix& y) {
    const auto n_paths = a.n_paths();
    const auto n = a.n_primitives();
    const auto m = a.n_instruments();
    const auto r = static_cast<std::size_t>(x.cols());
    const auto p = static_cast<std::size_t>(y.cols());
    Eigen::MatrixXd bm = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * p), static_cast<Eigen::Index>(m * r));
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n * p));
    for (std::size_t s = 0; s < p; ++s)
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = static_cast<Eigen::Index>(s * n + i);
            for (std::size_t l = 0; l < n_paths; ++l) {
                const double ys = y(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(s));
                beta(row) += b.at(l, i) * ys;
                for (std::size_t q = 0; q < r; ++q)
                    for (std::size_t j = 0; j < m; ++j)
                        bm(row, static_cast<Eigen::Index>(q * m + j)) +=
                            a.at(l, i, j) * x(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(q)) * ys;
            }
        }
    const double inv = 1.0 / static_cast<double>(n_paths);
    return {bm * inv, beta * inv};
}

/// Minimum-norm least squares through a complete orthogonal decomposition.
inline Eigen::VectorXd min_norm(const Eigen::MatrixXd& c, const Eigen::VectorXd& d) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(c);
    cod.setThreshold(1e-12);
    return cod.solve(d);
}

/// X_lq = sqrt(N) 1{l == q}
inline Matrix path_indicator_basis(std::size_t n_paths) {
    return Matrix::Identity(static_cast<Eigen::Index>(n_paths), static_cast<Eigen::Index>(n_paths)) *
           std::sqrt(static_cast<double>(n_paths));
}

inline Matrix constant_basis(std::size_t n_paths) { return Matrix::Ones(static_cast<Eigen::Index>(n_paths), 1); }

/// The two-path scalar instance A = (1, 2), b = (1, 4).
inline SensitivityTensor scalar_a() { return SensitivityTensor(2, 1, 1, {1.0, 2.0}); }
inline PrimitiveSensitivities scalar_b() { return PrimitiveSensitivities(2, 1, {1.0, 4.0}); }

}  // namespace hr::test
