// Compiled with -mavx2 (see src/CMakeLists.txt). Only reached after a
// runtime check for AVX2 support.

#include "hedgeratio/simd.hpp"

#if defined(HR_SIMD_HAVE_AVX2_TU)

#include <immintrin.h>

namespace hr::simd::avx2 {

double dot(const double* x, const double* y, std::size_t len) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 8 <= len; k += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(x + k + 4), _mm256_loadu_pd(y + k + 4)));
    }
    for (; k + 4 <= len; k += 4) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
    }
    acc0 = _mm256_add_pd(acc0, acc1);
    __m128d lo = _mm256_castpd256_pd128(acc0);
    __m128d hi = _mm256_extractf128_pd(acc0, 1);
    lo = _mm_add_pd(lo, hi);
    double sum = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
    for (; k < len; ++k) sum += x[k] * y[k];
    return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t len) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t k = 0;
    for (; k + 4 <= len; k += 4) {
        __m256d prod = _mm256_mul_pd(a, _mm256_loadu_pd(x + k));
        _mm256_storeu_pd(y + k, _mm256_add_pd(_mm256_loadu_pd(y + k), prod));
    }
    for (; k < len; ++k) y[k] += alpha * x[k];
}

void scale(double alpha, const double* x, double* y, std::size_t len) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t k = 0;
    for (; k + 4 <= len; k += 4) _mm256_storeu_pd(y + k, _mm256_mul_pd(a, _mm256_loadu_pd(x + k)));
    for (; k < len; ++k) y[k] = alpha * x[k];
}

void add(const double* x, double* y, std::size_t len) {
    std::size_t k = 0;
    for (; k + 4 <= len; k += 4) {
        _mm256_storeu_pd(y + k, _mm256_add_pd(_mm256_loadu_pd(y + k), _mm256_loadu_pd(x + k)));
    }
    for (; k < len; ++k) y[k] += x[k];
}

}  // namespace hr::simd::avx2

#endif
