#include "hedgeratio/basis.hpp"
#include "hedgeratio/diagnostics.hpp"
#include "hedgeratio/error.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hr;

namespace {

HedgeCoefficients scalar_xi(double v) { return HedgeCoefficients(Matrix::Constant(1, 1, v), ""); }

}  // namespace

TEST(ResidualReport, ScalarInstance) {
    const auto a = test::scalar_a();
    const auto b = test::scalar_b();
    const Matrix x = test::constant_basis(2);
    const auto sys = assemble_galerkin(a, b, x, "");
    const auto ls = residual_report(scalar_xi(1.8), a, b, x, &x, &sys);
    EXPECT_NEAR(ls.full_residual, 0.4, 1e-15);
    EXPECT_NEAR(ls.per_path_norms[0], 0.8, 1e-15);
    EXPECT_NEAR(ls.per_path_norms[1], 0.4, 1e-15);
    EXPECT_NEAR(ls.design_orthogonality, 0.0, 1e-15);

    const auto pg = residual_report(scalar_xi(5.0 / 3.0), a, b, x, &x, &sys);
    EXPECT_NEAR(pg.full_residual, 4.0 / 9.0, 1e-15);
    EXPECT_NEAR(*pg.tested_moments, 0.0, 1e-15);
    EXPECT_NEAR(*pg.projected_residual, 0.0, 1e-15);
    EXPECT_GT(pg.design_orthogonality, 0.1);
}

TEST(ResidualReport, ZeroCoefficientsGiveMeanSquaredB) {
    const auto r = residual_report(scalar_xi(0.0), test::scalar_a(), test::scalar_b(), test::constant_basis(2));
    EXPECT_DOUBLE_EQ(r.full_residual, 8.5);
    EXPECT_FALSE(r.projected_residual.has_value());
    EXPECT_FALSE(r.tested_moments.has_value());
}

TEST(ResidualReport, ExactRecovery) {
    std::mt19937_64 rng(61);
    const auto a = test::random_tensor(rng, 30, 2, 2);
    const auto set = orthonormalize(test::random_matrix(rng, 30, 2));
    const HedgeCoefficients xi(test::random_matrix(rng, 2, 2), set.ortho.id);
    const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(xi.flat().data(), 4);
    const Eigen::VectorXd bv = test::design(a, set.ortho.values) * z;
    const PrimitiveSensitivities b(30, 2, std::vector<double>(bv.data(), bv.data() + bv.size()));
    const auto sys = assemble_galerkin(a, b, set.ortho.values, set.ortho.id);
    const auto r = residual_report(xi, a, b, set.ortho.values, &set.ortho.values, &sys);
    EXPECT_LE(r.full_residual, 1e-28);
    EXPECT_LE(*r.projected_residual, 1e-14);
    for (double v : r.per_path_norms) EXPECT_GE(v, 0.0);
}

TEST(PathwiseInner, MeanOfPathDots) {
    const std::vector<double> u{1, 2, 3, 4};
    const std::vector<double> v{1, 1, 2, 0};
    EXPECT_DOUBLE_EQ(pathwise_inner(u, v, 2), (3.0 + 6.0) / 2.0);
    EXPECT_THROW((void)pathwise_inner(u, v, 3), DimensionError);
}

TEST(PathwiseOracle, Examples) {
    const auto s = pathwise_oracle_solve(SensitivityTensor(1, 1, 1, {2.0}), PrimitiveSensitivities(1, 1, {5.0}));
    EXPECT_DOUBLE_EQ(s.phi.values(0, 0), 2.5);

    const auto u = pathwise_oracle_solve(SensitivityTensor(1, 1, 2, {1.0, 1.0}), PrimitiveSensitivities(1, 1, {2.0}));
    EXPECT_NEAR(u.phi.values(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(u.phi.values(0, 1), 1.0, 1e-15);
    EXPECT_EQ(u.ranks[0], 1u);

    const auto o = pathwise_oracle_solve(SensitivityTensor(1, 2, 1, {1.0, 1.0}), PrimitiveSensitivities(1, 2, {1.0, 3.0}));
    EXPECT_NEAR(o.phi.values(0, 0), 2.0, 1e-15);
}

TEST(PathwiseOracle, ThreadCountDoesNotChangeResult) {
    std::mt19937_64 rng(62);
    const auto a = test::random_tensor(rng, 500, 3, 2);
    const auto b = test::random_primitive(rng, 500, 3);
    const auto s1 = pathwise_oracle_solve(a, b, kDefaultRcond, 1);
    const auto s4 = pathwise_oracle_solve(a, b, kDefaultRcond, 4);
    EXPECT_EQ(s1.phi.values, s4.phi.values);
    EXPECT_EQ(s1.conditions, s4.conditions);
}

TEST(PathwiseOracle, FlagsIllConditionedPaths) {
    const SensitivityTensor a(2, 2, 2, {1, 0, 0, 1, 1, 1, 1, 1});
    const auto s = pathwise_oracle_solve(a, PrimitiveSensitivities(2, 2, {1, 1, 2, 2}));
    EXPECT_EQ(s.ranks[0], 2u);
    EXPECT_EQ(s.ranks[1], 1u);
    EXPECT_TRUE(std::isinf(s.conditions[1]));
    EXPECT_NEAR(s.phi.values(1, 0), 1.0, 1e-14);
}

TEST(RegressPathwise, Examples) {
    const auto c = BasisMatrix::wrap(test::constant_basis(4));
    const HedgeRatioMatrix flat{Matrix::Constant(4, 1, 0.7)};
    EXPECT_NEAR(regress_pathwise(flat, c).at(0, 0), 0.7, 1e-15);

    std::mt19937_64 rng(63);
    const auto set = orthonormalize(test::random_matrix(rng, 40, 3));
    const HedgeCoefficients xi(test::random_matrix(rng, 2, 3), set.ortho.id);
    const auto phi = reconstruct_hedge(xi, set.ortho);
    const auto back = reconstruct_hedge(regress_pathwise(phi, set.ortho), set.ortho);
    EXPECT_LE((back.values - phi.values).cwiseAbs().maxCoeff(), 1e-12);

    const auto path = pathwise_oracle_solve(test::scalar_a(), test::scalar_b());
    EXPECT_DOUBLE_EQ(path.phi.values(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(path.phi.values(1, 0), 2.0);
    EXPECT_NEAR(regress_pathwise(path.phi, BasisMatrix::wrap(test::constant_basis(2))).at(0, 0), 1.5, 1e-15);

    EXPECT_THROW((void)regress_pathwise(flat, BasisMatrix::wrap(test::constant_basis(3))), DimensionError);
}

TEST(CompareFormulations, ScalarInstance) {
    const auto x = BasisMatrix::wrap(test::constant_basis(2));
    const auto rec = compare_formulations(test::scalar_a(), test::scalar_b(), x, x);
    EXPECT_NEAR(rec.get("least_squares").coefficients.at(0, 0), 1.8, 1e-12);
    EXPECT_NEAR(rec.get("projected").coefficients.at(0, 0), 5.0 / 3.0, 1e-12);
    EXPECT_NEAR(rec.get("regress_pathwise").coefficients.at(0, 0), 1.5, 1e-12);
    EXPECT_NEAR(rec.get("least_squares").residuals.full_residual, 0.4, 1e-12);
    EXPECT_NEAR(rec.get("projected").residuals.full_residual, 4.0 / 9.0, 1e-12);
    EXPECT_LT(rec.get("least_squares").residuals.full_residual, rec.get("projected").residuals.full_residual);
    EXPECT_THROW((void)rec.get("nope"), ConfigError);
}

TEST(CompareFormulations, DeterministicASolvableBlocksAgree) {
    std::mt19937_64 rng(64);
    const Matrix a0 = test::random_matrix(rng, 2, 2) + 2.0 * Matrix::Identity(2, 2);
    const auto a = SensitivityTensor::deterministic(100, a0);
    const auto b = test::random_primitive(rng, 100, 2);
    const auto set = orthonormalize(test::random_matrix(rng, 100, 3));
    const auto rec = compare_formulations(a, b, set.ortho, set.ortho);
    const Matrix& ls = rec.get("least_squares").coefficients.values();
    EXPECT_LE((ls - rec.get("projected").coefficients.values()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(CompareFormulations, LeastSquaresDominatesFullResidual) {
    std::mt19937_64 rng(65);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n_paths = 20 + rng() % 40, n = 1 + rng() % 3, m = 1 + rng() % 3;
        const auto a = test::random_tensor(rng, n_paths, n, m);
        const auto b = test::random_primitive(rng, n_paths, n);
        const auto set = orthonormalize(test::random_matrix(rng, n_paths, 1 + rng() % 3));
        const auto rec = compare_formulations(a, b, set.ortho, set.ortho);
        const double ls = rec.get("least_squares").residuals.full_residual;
        EXPECT_LE(ls, rec.get("projected").residuals.full_residual + 1e-12);
        EXPECT_LE(ls, rec.get("regress_pathwise").residuals.full_residual + 1e-12);
    }
}

TEST(CompareFormulations, FullPathBasisMatchesPathwiseOracle) {
    std::mt19937_64 rng(66);
    for (std::size_t n_paths : {4u, 16u, 32u}) {
        const auto a = test::random_tensor(rng, n_paths, 2, 2);
        const auto b = test::random_primitive(rng, n_paths, 2);
        const auto x = BasisMatrix::wrap(test::path_indicator_basis(n_paths));
        const auto fit = solve_reduced(assemble_normal(a, b, x.values), {}, x.id);
        const auto phi = reconstruct_hedge(fit.coefficients, x);
        const auto oracle = pathwise_oracle_solve(a, b);
        EXPECT_LE((phi.values - oracle.phi.values).cwiseAbs().maxCoeff(), 1e-8) << n_paths;
    }
}
