#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop kernels used by basis evaluation, assembly and matrix-free
// application. Every kernel has a scalar reference implementation; wider
// variants are selected at runtime from the host CPU features.
//
// axpy and scale are elementwise (mul then add, no fused multiply-add), so
// every variant produces bitwise identical results. dot reduces in a
// variant-specific order and agrees only to rounding.

namespace hr::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
    /// sum_k x[k] * y[k]
    double (*dot)(const double* x, const double* y, std::size_t len);
    /// y[k] += alpha * x[k]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t len);
    /// y[k] = alpha * x[k]
    void (*scale)(double alpha, const double* x, double* y, std::size_t len);
    /// y[k] += x[k]
    void (*add)(const double* x, double* y, std::size_t len);
};

namespace scalar {
double dot(const double* x, const double* y, std::size_t len);
void axpy(double alpha, const double* x, double* y, std::size_t len);
void scale(double alpha, const double* x, double* y, std::size_t len);
void add(const double* x, double* y, std::size_t len);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define HR_SIMD_HAVE_AVX2_TU 1
namespace avx2 {
double dot(const double* x, const double* y, std::size_t len);
void axpy(double alpha, const double* x, double* y, std::size_t len);
void scale(double alpha, const double* x, double* y, std::size_t len);
void add(const double* x, double* y, std::size_t len);
}  // namespace avx2
#endif

/// True if the host can run `isa`.
bool supported(Isa isa) noexcept;

/// Best supported variant on this host.
Isa detect_best() noexcept;

/// Table for a specific variant; falls back to scalar if unsupported.
const KernelTable& table(Isa isa) noexcept;

/// Currently active table. Initialized from detect_best() on first use.
const KernelTable& active() noexcept;
Isa active_isa() noexcept;

/// Overrides the active variant (tests and benchmarking). Returns false if unsupported.
bool set_active(Isa isa) noexcept;

std::string_view name(Isa isa) noexcept;

}  // namespace hr::simd
