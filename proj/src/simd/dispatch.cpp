#include "hedgeratio/simd.hpp"

#include <atomic>

namespace hr::simd {
namespace {

constexpr KernelTable kScalar{&scalar::dot, &scalar::axpy, &scalar::scale, &scalar::add};
#if defined(HR_SIMD_HAVE_AVX2_TU)
constexpr KernelTable kAvx2{&avx2::dot, &avx2::axpy, &avx2::scale, &avx2::add};
#endif

std::atomic<const KernelTable*> g_active{nullptr};
std::atomic<Isa> g_active_isa{Isa::scalar};

}  // namespace

bool supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(HR_SIMD_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

Isa detect_best() noexcept { return supported(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

const KernelTable& table(Isa isa) noexcept {
#if defined(HR_SIMD_HAVE_AVX2_TU)
    if (isa == Isa::avx2 && supported(Isa::avx2)) return kAvx2;
#endif
    (void)isa;
    return kScalar;
}

const KernelTable& active() noexcept {
    const KernelTable* t = g_active.load(std::memory_order_acquire);
    if (t == nullptr) {
        const Isa best = detect_best();
        g_active_isa.store(best, std::memory_order_relaxed);
        t = &table(best);
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

Isa active_isa() noexcept {
    (void)active();
    return g_active_isa.load(std::memory_order_relaxed);
}

bool set_active(Isa isa) noexcept {
    if (!supported(isa)) return false;
    g_active_isa.store(isa, std::memory_order_relaxed);
    g_active.store(&table(isa), std::memory_order_release);
    return true;
}

std::string_view name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

}  // namespace hr::simd
