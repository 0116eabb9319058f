#include "hedgeratio/parallel.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cstring>
#include <random>
#include <stdexcept>

using namespace hr;

namespace {

std::vector<double> sum_values(const std::vector<double>& v, const AssemblyOptions& options) {
    return reduce_over_paths(v.size(), 2, options, [&](std::size_t first, std::size_t last, std::span<double> buf) {
        for (std::size_t l = first; l < last; ++l) {
            buf[0] += v[l];
            buf[1] += v[l] * v[l];
        }
    });
}

std::vector<double> noisy(std::size_t n) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& e : v) e = u(rng) * std::pow(10.0, u(rng) * 8);
    return v;
}

}  // namespace

TEST(ReduceOverPaths, PairwiseBitwiseAcrossThreadCounts) {
    const auto v = noisy(100003);
    const auto ref = sum_values(v, {1, Reduction::pairwise, 0});
    for (std::size_t threads : {2u, 3u, 4u, 7u, 16u}) {
        const auto got = sum_values(v, {threads, Reduction::pairwise, 0});
        EXPECT_EQ(std::memcmp(ref.data(), got.data(), 2 * sizeof(double)), 0) << threads;
    }
}

TEST(ReduceOverPaths, ModesAgreeNumerically) {
    const auto v = noisy(50000);
    const auto a = sum_values(v, {1, Reduction::pairwise, 0});
    const auto b = sum_values(v, {1, Reduction::sequential, 0});
    const auto c = sum_values(v, {4, Reduction::dynamic, 0});
    EXPECT_NEAR(a[0], b[0], 1e-6 * std::abs(a[1]));
    EXPECT_NEAR(a[0], c[0], 1e-6 * std::abs(a[1]));
    EXPECT_NEAR(a[1], b[1], 1e-12 * a[1]);
}

TEST(ReduceOverPaths, SequentialMatchesPlainLoop) {
    const auto v = noisy(1234);
    double s = 0.0;
    for (double x : v) s += x;
    const auto got = sum_values(v, {1, Reduction::sequential, 0});
    EXPECT_EQ(got[0], s);
}

TEST(ReduceOverPaths, ExplicitBlockSizeVisitsEveryPathOnce) {
    std::vector<double> v(1001, 1.0);
    for (std::size_t bs : {1u, 7u, 1000u, 5000u}) {
        const auto got = sum_values(v, {3, Reduction::pairwise, bs});
        EXPECT_EQ(got[0], 1001.0) << bs;
    }
}

TEST(ReduceOverPaths, PropagatesWorkerExceptions) {
    auto boom = [](std::size_t first, std::size_t last, std::span<double>) {
        if (first <= 5000 && 5000 < last) throw std::runtime_error("boom");
    };
    EXPECT_THROW((void)reduce_over_paths(10000, 1, {4, Reduction::pairwise, 100}, boom), std::runtime_error);
    EXPECT_THROW((void)reduce_over_paths(10000, 1, {4, Reduction::dynamic, 100}, boom), std::runtime_error);
}

TEST(ParallelForPaths, CoversRangeDisjointly) {
    std::vector<std::atomic<int>> hits(9973);
    parallel_for_paths(hits.size(), 5, [&](std::size_t first, std::size_t last) {
        for (std::size_t l = first; l < last; ++l) hits[l].fetch_add(1);
    });
    for (const auto& h : hits) ASSERT_EQ(h.load(), 1);
}
