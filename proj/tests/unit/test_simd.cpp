#include "hedgeratio/reduce_ls.hpp"
#include "hedgeratio/reduce_projected.hpp"
#include "hedgeratio/simd.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

using namespace hr;

namespace {

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

class ActiveIsa {
public:
    explicit ActiveIsa(simd::Isa isa) : saved_(simd::active_isa()) { simd::set_active(isa); }
    ~ActiveIsa() { simd::set_active(saved_); }

private:
    simd::Isa saved_;
};

// Lengths around the 4-wide and 8-wide unrolled tails.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 1000, 1001};

}  // namespace

class SimdVariants : public ::testing::Test {
protected:
    void SetUp() override {
        if (!simd::supported(simd::Isa::avx2)) GTEST_SKIP() << "host lacks AVX2";
    }
};

TEST(SimdDispatch, ScalarAlwaysSupported) {
    EXPECT_TRUE(simd::supported(simd::Isa::scalar));
    EXPECT_TRUE(simd::supported(simd::detect_best()));
    EXPECT_EQ(simd::name(simd::Isa::scalar), "scalar");
    EXPECT_EQ(simd::name(simd::Isa::avx2), "avx2");
}

TEST(SimdDispatch, SetActiveSwitchesTable) {
    const auto saved = simd::active_isa();
    ASSERT_TRUE(simd::set_active(simd::Isa::scalar));
    EXPECT_EQ(simd::active().dot, simd::table(simd::Isa::scalar).dot);
    simd::set_active(saved);
}

TEST(ScalarKernels, Reference) {
    const auto& k = simd::table(simd::Isa::scalar);
    const double x[] = {1, 2, 3};
    double y[] = {1, 1, 1};
    EXPECT_EQ(k.dot(x, x, 3), 14.0);
    k.axpy(2.0, x, y, 3);
    EXPECT_EQ(y[2], 7.0);
    k.scale(0.5, x, y, 3);
    EXPECT_EQ(y[1], 1.0);
    k.add(x, y, 3);
    EXPECT_EQ(y[0], 1.5);
}

TEST_F(SimdVariants, ElementwiseKernelsBitwiseEqual) {
    const auto& s = simd::table(simd::Isa::scalar);
    const auto& v = simd::table(simd::Isa::avx2);
    std::mt19937_64 rng(11);
    for (std::size_t len : kLengths) {
        const auto x = test::random_values(rng, len, -1e3, 1e3);
        const auto y0 = test::random_values(rng, len, -1e3, 1e3);
        const double alpha = 0.1234567891;

        auto ys = y0, yv = y0;
        s.axpy(alpha, x.data(), ys.data(), len);
        v.axpy(alpha, x.data(), yv.data(), len);
        EXPECT_TRUE(bitwise_equal(ys, yv)) << "axpy len " << len;

        s.scale(alpha, x.data(), ys.data(), len);
        v.scale(alpha, x.data(), yv.data(), len);
        EXPECT_TRUE(bitwise_equal(ys, yv)) << "scale len " << len;

        ys = y0;
        yv = y0;
        s.add(x.data(), ys.data(), len);
        v.add(x.data(), yv.data(), len);
        EXPECT_TRUE(bitwise_equal(ys, yv)) << "add len " << len;
    }
}

TEST_F(SimdVariants, DotAgreesWithinReorderingBound) {
    const auto& s = simd::table(simd::Isa::scalar);
    const auto& v = simd::table(simd::Isa::avx2);
    std::mt19937_64 rng(12);
    for (std::size_t len : kLengths) {
        const auto x = test::random_values(rng, len);
        const auto y = test::random_values(rng, len);
        double abs_sum = 0.0;
        for (std::size_t k = 0; k < len; ++k) abs_sum += std::abs(x[k] * y[k]);
        const double bound = 2.0 * static_cast<double>(len) * 1.2e-16 * abs_sum;
        EXPECT_LE(std::abs(s.dot(x.data(), y.data(), len) - v.dot(x.data(), y.data(), len)), bound) << len;
    }
}

TEST_F(SimdVariants, UnalignedPointers) {
    const auto& s = simd::table(simd::Isa::scalar);
    const auto& v = simd::table(simd::Isa::avx2);
    std::mt19937_64 rng(13);
    const auto x = test::random_values(rng, 40);
    const auto y0 = test::random_values(rng, 40);
    for (std::size_t off = 0; off < 4; ++off) {
        auto ys = y0, yv = y0;
        s.axpy(-1.5, x.data() + off, ys.data() + off, 33);
        v.axpy(-1.5, x.data() + off, yv.data() + off, 33);
        EXPECT_TRUE(bitwise_equal(ys, yv));
    }
}

TEST_F(SimdVariants, AssemblyBitwiseEqualAcrossVariants) {
    std::mt19937_64 rng(14);
    const auto a = test::random_tensor(rng, 3000, 3, 2);
    const auto b = test::random_primitive(rng, 3000, 3);
    const Matrix x = test::random_matrix(rng, 3000, 5);
    const Matrix y = test::random_matrix(rng, 3000, 4);

    NormalSystem ns_s, ns_v;
    ProjectedSystem ps_s, ps_v;
    {
        ActiveIsa guard(simd::Isa::scalar);
        ns_s = assemble_normal(a, b, x);
        ps_s = assemble_projected(a, b, x, y);
    }
    {
        ActiveIsa guard(simd::Isa::avx2);
        ns_v = assemble_normal(a, b, x);
        ps_v = assemble_projected(a, b, x, y);
    }
    EXPECT_TRUE(bitwise_equal(ns_s.g, ns_v.g));
    EXPECT_TRUE(std::memcmp(ns_s.h.data(), ns_v.h.data(), sizeof(double) * ns_s.h.size()) == 0);
    EXPECT_TRUE(bitwise_equal(ps_s.b, ps_v.b));
    EXPECT_TRUE(std::memcmp(ps_s.beta.data(), ps_v.beta.data(), sizeof(double) * ps_s.beta.size()) == 0);
}
