#include "hedgeratio/basis.hpp"
#include "hedgeratio/error.hpp"
#include "hedgeratio/reduce_ls.hpp"
#include "hedgeratio/reduce_projected.hpp"
#include "hedgeratio/solve.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace hr;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v) out(i++) = e;
    return out;
}

RegularizationSpec ridge(double lambda, std::optional<Vector> z0 = std::nullopt) {
    RegularizationSpec r;
    r.lambda = lambda;
    r.z0 = std::move(z0);
    return r;
}

// Exact-recovery instance: A = (1, 2), X columns (1, 1) and (1, -1), xi* = (1, 0.5).
struct Recovery {
    SensitivityTensor a = test::scalar_a();
    Matrix x = mat({{1, 1}, {1, -1}});
    PrimitiveSensitivities b = PrimitiveSensitivities(2, 1, {1.5, 1.0});
};

}  // namespace

TEST(SolveLeastSquares, Examples) {
    EXPECT_DOUBLE_EQ(solve_least_squares(mat({{1}}), vec({1})).solution(0), 1.0);
    EXPECT_DOUBLE_EQ(solve_least_squares(mat({{1}}), vec({1}), ridge(1.0)).solution(0), 0.5);
    EXPECT_DOUBLE_EQ(solve_least_squares(mat({{1}}), vec({1}), ridge(1.0, vec({1}))).solution(0), 1.0);
    const auto over = solve_least_squares(mat({{1}, {1}}), vec({1, 3}));
    EXPECT_DOUBLE_EQ(over.solution(0), 2.0);
    EXPECT_NEAR(over.residual_norm, std::sqrt(2.0), 1e-15);
    EXPECT_EQ(over.rank, 1u);
    EXPECT_EQ(over.method, SolveMethod::least_squares);
    EXPECT_EQ(solve_least_squares(mat({{1}}), vec({1}), ridge(1.0)).method, SolveMethod::regularized);
}

TEST(SolveLeastSquares, MinimumNormOnRankDeficient) {
    const auto r = solve_least_squares(mat({{1, 1}, {1, 1}}), vec({2, 2}));
    EXPECT_NEAR(r.solution(0), 1.0, 1e-14);
    EXPECT_NEAR(r.solution(1), 1.0, 1e-14);
    EXPECT_EQ(r.rank, 1u);
    EXPECT_TRUE(std::isinf(r.condition_estimate));
}

TEST(SolveLeastSquares, MatchesCompleteOrthogonalDecomposition) {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t rows = 2 + rng() % 8, cols = 1 + rng() % 8;
        Matrix c = test::random_matrix(rng, rows, cols);
        if (cols > 1 && trial % 2) c.col(0) = c.col(cols - 1);
        const Vector d = test::random_matrix(rng, rows, 1);
        const auto r = solve_least_squares(c, d);
        EXPECT_LE((r.solution - test::min_norm(c, d)).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LE(r.rank, std::min(rows, cols));
        EXPECT_GE(r.residual_norm, 0.0);
    }
}

TEST(SolveLeastSquares, GeneralTikhonovAgainstNormalEquations) {
    std::mt19937_64 rng(52);
    const Matrix c = test::random_matrix(rng, 6, 3);
    const Vector d = test::random_matrix(rng, 6, 1);
    RegularizationSpec reg;
    reg.lambda = 0.3;
    reg.l = test::random_matrix(rng, 3, 3) + 3.0 * Matrix::Identity(3, 3);
    reg.z0 = Vector(test::random_matrix(rng, 3, 1));
    reg.w = Matrix(test::random_matrix(rng, 6, 6) + 3.0 * Matrix::Identity(6, 6));
    const Eigen::MatrixXd wc = *reg.w * c;
    const Eigen::MatrixXd ltl = reg.l->transpose() * *reg.l;
    const Eigen::VectorXd expected = (wc.transpose() * wc + reg.lambda * ltl)
                                         .ldlt()
                                         .solve(wc.transpose() * (*reg.w * d) + reg.lambda * ltl * *reg.z0);
    EXPECT_LE((solve_least_squares(c, d, reg).solution - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SolveLeastSquares, Errors) {
    EXPECT_THROW((void)solve_least_squares(mat({{1}}), vec({1}), ridge(-1.0)), ConfigError);
    RegularizationSpec reg = ridge(1.0);
    reg.l = mat({{1, 1}, {1, 1}});
    EXPECT_THROW((void)solve_least_squares(mat({{1, 0}, {0, 1}}), vec({1, 1}), reg), ConfigError);
    EXPECT_THROW((void)solve_least_squares(mat({{std::nan("")}}), vec({1})), NonFiniteError);
    EXPECT_THROW((void)solve_least_squares(mat({{1}}), vec({1, 2})), DimensionError);
    EXPECT_THROW((void)solve_least_squares(mat({{1}}), vec({1}), ridge(1.0, vec({1, 2}))), DimensionError);
}

TEST(SolveLeastSquares, RidgeShrinkageMonotone) {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix c = test::random_matrix(rng, 8, 4);
        const Vector d = test::random_matrix(rng, 8, 1);
        double prev = std::numeric_limits<double>::infinity();
        for (double lambda : {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0}) {
            const double nrm = solve_least_squares(c, d, ridge(lambda)).solution.norm();
            EXPECT_LE(nrm, prev * (1 + 1e-14));
            prev = nrm;
        }
    }
}

TEST(SolveLeastSquares, SmallLambdaConsistency) {
    std::mt19937_64 rng(54);
    const Matrix c = test::random_matrix(rng, 10, 4);
    const Vector d = test::random_matrix(rng, 10, 1);
    const Vector z0 = test::random_matrix(rng, 4, 1) * 100.0;
    const auto exact = solve_least_squares(c, d).solution;
    EXPECT_LE((solve_least_squares(c, d, ridge(1e-12, z0)).solution - exact).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ConditionEstimate, Examples) {
    EXPECT_DOUBLE_EQ(condition_estimate(Matrix::Identity(3, 3)), 1.0);
    EXPECT_NEAR(condition_estimate(mat({{1, 0}, {0, 10}})), 10.0, 1e-12);
    EXPECT_TRUE(std::isinf(condition_estimate(mat({{1, 1}, {1, 1}}))));
}

TEST(SolveReduced, ScalarInstances) {
    const Matrix x = test::constant_basis(2);
    const auto ls = solve_reduced(assemble_normal(test::scalar_a(), test::scalar_b(), x), {}, "c");
    EXPECT_NEAR(ls.coefficients.at(0, 0), 1.8, 1e-14);
    EXPECT_EQ(ls.coefficients.basis_id(), "c");
    const auto pg = solve_reduced(assemble_galerkin(test::scalar_a(), test::scalar_b(), x, "c"), {}, "c");
    EXPECT_NEAR(pg.coefficients.at(0, 0), 5.0 / 3.0, 1e-14);
    EXPECT_EQ(pg.report.method, SolveMethod::direct);
}

TEST(SolveReduced, ExactRecoveryInstance) {
    const Recovery inst;
    const auto ls = solve_reduced(assemble_normal(inst.a, inst.b, inst.x), {}, "");
    const auto pg = solve_reduced(assemble_galerkin(inst.a, inst.b, inst.x, ""), {}, "");
    for (const auto* fit : {&ls, &pg}) {
        EXPECT_NEAR(fit->coefficients.at(0, 0), 1.0, 1e-12);
        EXPECT_NEAR(fit->coefficients.at(0, 1), 0.5, 1e-12);
    }
}

TEST(SolveReduced, SingularSquareProjectedSystem) {
    const Matrix x = mat({{1, 1}, {1, 1}});
    const auto s = assemble_galerkin(test::scalar_a(), test::scalar_b(), x, "");
    EXPECT_THROW((void)solve_reduced(s, {}, ""), SingularSystemError);
    SolveOptions fallback;
    fallback.least_squares_fallback = true;
    const auto fit = solve_reduced(s, {}, "", fallback);
    EXPECT_EQ(fit.report.method, SolveMethod::least_squares);
    EXPECT_EQ(fit.report.rank, 1u);
    EXPECT_NO_THROW((void)solve_reduced(s, ridge(1e-3), ""));
}

TEST(SolveReduced, OverdeterminedProjectedIsLeastSquares) {
    std::mt19937_64 rng(55);
    const auto a = test::random_tensor(rng, 30, 2, 1);
    const auto b = test::random_primitive(rng, 30, 2);
    const Matrix x = test::random_matrix(rng, 30, 2);
    const Matrix y = test::random_matrix(rng, 30, 3);
    const auto s = assemble_projected(a, b, x, y);
    const auto fit = solve_reduced(s, {}, "");
    EXPECT_EQ(fit.report.method, SolveMethod::least_squares);
    const Eigen::VectorXd expected = test::min_norm(s.b, s.beta);
    const auto flat = fit.coefficients.flat();
    for (std::size_t k = 0; k < flat.size(); ++k) EXPECT_NEAR(flat[k], expected(k), 1e-10);
}

TEST(SolveReduced, NormalSystemRegularizedMatchesStackedLeastSquares) {
    std::mt19937_64 rng(56);
    const auto a = test::random_tensor(rng, 25, 2, 2);
    const auto b = test::random_primitive(rng, 25, 2);
    const Matrix x = test::random_matrix(rng, 25, 2);
    const double lambda = 0.05;
    const auto fit = solve_reduced(assemble_normal(a, b, x), ridge(lambda), "");
    // (1/N)||D z - y||^2 + lambda ||z||^2  ==  ||D z / sqrt(N) - y / sqrt(N)||^2 + lambda ||z||^2
    const double s = std::sqrt(25.0);
    const auto direct = solve_least_squares(test::design(a, x) / s, test::stacked(b) / s, ridge(lambda));
    const auto flat = fit.coefficients.flat();
    for (std::size_t k = 0; k < flat.size(); ++k) EXPECT_NEAR(flat[k], direct.solution(k), 1e-12);
}

TEST(SolveMatrixFree, AgreesWithDenseSolve) {
    std::mt19937_64 rng(57);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n_paths = 200, n = 1 + rng() % 3, m = 1 + rng() % 3, r = 1 + rng() % 5;
        const auto a = test::random_tensor(rng, n_paths, n, m);
        const auto b = test::random_primitive(rng, n_paths, n);
        const auto set = orthonormalize(test::random_matrix(rng, n_paths, r));
        for (double lambda : {0.0, 1e-3}) {
            const auto dense = solve_reduced(assemble_normal(a, b, set.ortho.values), ridge(lambda), "");
            const auto free = solve_matrix_free(a, b, set.ortho.values, ridge(lambda), "");
            EXPECT_LE((dense.coefficients.values() - free.coefficients.values()).cwiseAbs().maxCoeff(), 1e-7);
            EXPECT_EQ(free.report.method, SolveMethod::iterative);
            EXPECT_GT(free.report.iterations, 0u);
        }
    }
}

TEST(SolveMatrixFree, RawBasisWithPrior) {
    std::mt19937_64 rng(58);
    const auto a = test::random_tensor(rng, 100, 2, 2);
    const auto b = test::random_primitive(rng, 100, 2);
    const Matrix z = test::random_matrix(rng, 100, 3, 0.0, 5.0);
    const Vector z0 = test::random_matrix(rng, 6, 1);
    const auto dense = solve_reduced(assemble_normal(a, b, z), ridge(1e-2, z0), "");
    const auto free = solve_matrix_free(a, b, z, ridge(1e-2, z0), "");
    EXPECT_LE((dense.coefficients.values() - free.coefficients.values()).cwiseAbs().maxCoeff(), 1e-7);
    RegularizationSpec with_l = ridge(1.0);
    with_l.l = Matrix::Identity(6, 6) * 2.0;
    EXPECT_THROW((void)solve_matrix_free(a, b, z, with_l, ""), ConfigError);
}

TEST(SolveReduced, RawAndOrthonormalBasesReconstructSameHedge) {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n_paths = 80;
        const auto a = test::random_tensor(rng, n_paths, 2, 2);
        const auto b = test::random_primitive(rng, n_paths, 2);
        const Matrix z = test::random_matrix(rng, n_paths, 3, 0.5, 4.0);
        const auto raw = raw_basis(z);
        const auto onb = orthonormalize(z);
        const auto f_raw = solve_reduced(assemble_normal(a, b, raw.ortho.values), {}, raw.ortho.id);
        const auto f_onb = solve_reduced(assemble_normal(a, b, onb.ortho.values), {}, onb.ortho.id);
        const auto phi_raw = reconstruct_hedge(f_raw.coefficients, raw.ortho);
        const auto phi_onb = reconstruct_hedge(f_onb.coefficients, onb.ortho);
        EXPECT_LE((phi_raw.values - phi_onb.values).cwiseAbs().maxCoeff(), 1e-8);

        const auto p_raw = solve_reduced(assemble_galerkin(a, b, raw.ortho.values, ""), {}, raw.ortho.id);
        const auto p_onb = solve_reduced(assemble_galerkin(a, b, onb.ortho.values, ""), {}, onb.ortho.id);
        EXPECT_LE((reconstruct_hedge(p_raw.coefficients, raw.ortho).values -
                   reconstruct_hedge(p_onb.coefficients, onb.ortho).values)
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-8);
    }
}

TEST(SolveReduced, BlockDiagonalPathIndicatorSystem) {
    // 17 paths with a path-indicator basis give a 34 x 34 block-diagonal G.
    std::mt19937_64 rng(303);
    for (int skip = 0; skip < 2; ++skip) {
        (void)test::random_tensor(rng, skip == 0 ? 4 : 9, 2, 2);
        (void)test::random_primitive(rng, skip == 0 ? 4 : 9, 2);
    }
    const std::size_t n_paths = 17;
    const auto a = test::random_tensor(rng, n_paths, 2, 2);
    const auto b = test::random_primitive(rng, n_paths, 2);
    const Matrix x = test::path_indicator_basis(n_paths);
    const auto fit = solve_reduced(assemble_normal(a, b, x), {}, "");
    const Eigen::VectorXd ref = test::min_norm(test::design(a, x), test::stacked(b));
    const auto z = fit.coefficients.flat();
    for (std::size_t k = 0; k < z.size(); ++k) EXPECT_NEAR(z[k], ref(static_cast<Eigen::Index>(k)), 1e-9);
}
