#include <atomic>
#include <cstdlib>
#include <string_view>

#include "tailshift/kernels.hpp"

namespace tailshift::kernels {

namespace {

Backend detect() noexcept {
    const char* env = std::getenv("TAILSHIFT_KERNELS");
    if (env != nullptr && std::string_view(env) == "scalar") return Backend::Scalar;
    return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() noexcept {
    static std::atomic<Backend> b{detect()};
    return b;
}

}  // namespace

bool avx2_supported() noexcept {
#if defined(TAILSHIFT_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

Backend set_backend(Backend b) noexcept {
    if (b == Backend::Avx2 && !avx2_supported()) b = Backend::Scalar;
    current().store(b, std::memory_order_relaxed);
    return b;
}

std::string_view backend_name(Backend b) noexcept { return b == Backend::Avx2 ? "avx2" : "scalar"; }

double bridge_contrast(const double* x, const double* y, std::size_t len, std::size_t lo,
                       std::size_t hi) noexcept {
    if (hi < lo) return 0.0;
#if defined(TAILSHIFT_HAVE_AVX2)
    if (active_backend() == Backend::Avx2) return avx2::bridge_contrast(x, y, len, lo, hi);
#endif
    return scalar::bridge_contrast(x, y, len, lo, hi);
}

double max_split_ratio(const PathMoments& m, std::size_t a, std::size_t c, std::size_t k_lo,
                       std::size_t k_hi, double scale) noexcept {
#if defined(TAILSHIFT_HAVE_AVX2)
    if (active_backend() == Backend::Avx2) return avx2::max_split_ratio(m, a, c, k_lo, k_hi, scale);
#endif
    return scalar::max_split_ratio(m, a, c, k_lo, k_hi, scale);
}

}  // namespace tailshift::kernels
