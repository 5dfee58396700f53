#pragma once

// Data-parallel inner loops shared by the change-point statistics and the
// limit-distribution simulator. Each kernel has a scalar reference
// implementation and an AVX2 variant; the variant is chosen once at runtime
// from CPU features (override with TAILSHIFT_KERNELS=scalar|avx2).

#include <cstddef>
#include <span>
#include <string_view>

namespace tailshift::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend() noexcept;
// Forces a backend for the whole process (tests compare variants with this).
// Requesting Avx2 on a CPU without it falls back to Scalar; returns the backend
// actually installed.
Backend set_backend(Backend b) noexcept;
bool avx2_supported() noexcept;
std::string_view backend_name(Backend b) noexcept;

// Sum over j in [lo, hi] of j^2 (len - j)^2 (x[j] - y[len - j])^2.
//
// x and y are indexed by segment length: x[j] is an estimate on the first j
// points of a window of `len` points, y[len - j] an estimate on the
// remaining len - j points. Requires 1 <= lo, hi <= len - 1.
double bridge_contrast(const double* x, const double* y, std::size_t len, std::size_t lo,
                       std::size_t hi) noexcept;

// Cumulative moments of a discretised path W_0..W_N:
// s1[k] = sum_{j<k} W_j, s2[k] = sum_{j<k} W_j^2, sj[k] = sum_{j<k} j W_j.
// All four arrays have N + 1 entries.
struct PathMoments {
    std::span<const double> w;
    std::span<const double> s1;
    std::span<const double> s2;
    std::span<const double> sj;
};

// Sum over j in [a, b) of the squared Brownian-bridge residual
// (W_j - W_a - (j - a)/(b - a) (W_b - W_a))^2, from cumulative moments.
double bridge_energy(const PathMoments& m, std::size_t a, std::size_t b) noexcept;

// max over k in [k_lo, k_hi] of
//   scale * bridge_{a,c}(k)^2 / (bridge_energy(a, k) + bridge_energy(k, c))
// where bridge_{a,c}(k) = W_k - W_a - (k - a)/(c - a) (W_c - W_a).
// Splits with a non-positive denominator are skipped; returns -1 when every
// split was skipped. Requires a < k_lo <= k_hi < c.
double max_split_ratio(const PathMoments& m, std::size_t a, std::size_t c, std::size_t k_lo,
                       std::size_t k_hi, double scale) noexcept;

namespace scalar {
double bridge_contrast(const double* x, const double* y, std::size_t len, std::size_t lo,
                       std::size_t hi) noexcept;
double max_split_ratio(const PathMoments& m, std::size_t a, std::size_t c, std::size_t k_lo,
                       std::size_t k_hi, double scale) noexcept;
}  // namespace scalar

namespace avx2 {
double bridge_contrast(const double* x, const double* y, std::size_t len, std::size_t lo,
                       std::size_t hi) noexcept;
double max_split_ratio(const PathMoments& m, std::size_t a, std::size_t c, std::size_t k_lo,
                       std::size_t k_hi, double scale) noexcept;
}  // namespace avx2

}  // namespace tailshift::kernels
