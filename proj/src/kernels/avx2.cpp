// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "tailshift/kernels.hpp"

namespace tailshift::kernels::avx2 {

namespace {

inline double hsum(__m256d v) noexcept {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) noexcept {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_max_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

// Bridge energy over [start_k, end) for four starts, end fixed.
inline __m256d energy_to_fixed_end(const PathMoments& m, __m256d kv, __m256d wk, __m256d s1k,
                                   __m256d s2k, __m256d sjk, std::size_t end) noexcept {
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d len = _mm256_sub_pd(_mm256_set1_pd(static_cast<double>(end)), kv);
    const __m256d a1 = _mm256_sub_pd(_mm256_set1_pd(m.s1[end]), s1k);
    const __m256d a2 = _mm256_sub_pd(_mm256_set1_pd(m.s2[end]), s2k);
    const __m256d aj = _mm256_sub_pd(_mm256_set1_pd(m.sj[end]), sjk);
    // sv2 = a2 - 2 wk a1 + len wk^2
    __m256d sv2 = _mm256_sub_pd(a2, _mm256_mul_pd(two, _mm256_mul_pd(wk, a1)));
    sv2 = _mm256_add_pd(sv2, _mm256_mul_pd(len, _mm256_mul_pd(wk, wk)));
    // sjv = aj - k a1 - wk len (len - 1) / 2
    const __m256d lm1 = _mm256_sub_pd(len, one);
    __m256d sjv = _mm256_sub_pd(aj, _mm256_mul_pd(kv, a1));
    sjv = _mm256_sub_pd(sjv, _mm256_mul_pd(wk, _mm256_mul_pd(_mm256_set1_pd(0.5), _mm256_mul_pd(len, lm1))));
    const __m256d sjj = _mm256_div_pd(
        _mm256_mul_pd(_mm256_mul_pd(lm1, len), _mm256_sub_pd(_mm256_mul_pd(two, len), one)),
        _mm256_set1_pd(6.0));
    const __m256d g = _mm256_div_pd(_mm256_sub_pd(_mm256_set1_pd(m.w[end]), wk), len);
    __m256d e = _mm256_sub_pd(sv2, _mm256_mul_pd(two, _mm256_mul_pd(g, sjv)));
    return _mm256_add_pd(e, _mm256_mul_pd(_mm256_mul_pd(g, g), sjj));
}

// Bridge energy over [start, k) for four ends, start fixed.
inline __m256d energy_from_fixed_start(const PathMoments& m, std::size_t start, __m256d kv,
                                       __m256d wk, __m256d s1k, __m256d s2k, __m256d sjk) noexcept {
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d one = _mm256_set1_pd(1.0);
    const double wa = m.w[start];
    const __m256d wav = _mm256_set1_pd(wa);
    const __m256d len = _mm256_sub_pd(kv, _mm256_set1_pd(static_cast<double>(start)));
    const __m256d a1 = _mm256_sub_pd(s1k, _mm256_set1_pd(m.s1[start]));
    const __m256d a2 = _mm256_sub_pd(s2k, _mm256_set1_pd(m.s2[start]));
    const __m256d aj = _mm256_sub_pd(sjk, _mm256_set1_pd(m.sj[start]));
    __m256d sv2 = _mm256_sub_pd(a2, _mm256_mul_pd(two, _mm256_mul_pd(wav, a1)));
    sv2 = _mm256_add_pd(sv2, _mm256_mul_pd(len, _mm256_set1_pd(wa * wa)));
    const __m256d lm1 = _mm256_sub_pd(len, one);
    __m256d sjv = _mm256_sub_pd(aj, _mm256_mul_pd(_mm256_set1_pd(static_cast<double>(start)), a1));
    sjv = _mm256_sub_pd(sjv, _mm256_mul_pd(wav, _mm256_mul_pd(_mm256_set1_pd(0.5), _mm256_mul_pd(len, lm1))));
    const __m256d sjj = _mm256_div_pd(
        _mm256_mul_pd(_mm256_mul_pd(lm1, len), _mm256_sub_pd(_mm256_mul_pd(two, len), one)),
        _mm256_set1_pd(6.0));
    const __m256d g = _mm256_div_pd(_mm256_sub_pd(wk, wav), len);
    __m256d e = _mm256_sub_pd(sv2, _mm256_mul_pd(two, _mm256_mul_pd(g, sjv)));
    return _mm256_add_pd(e, _mm256_mul_pd(_mm256_mul_pd(g, g), sjj));
}

}  // namespace

double bridge_contrast(const double* x, const double* y, std::size_t len, std::size_t lo,
                       std::size_t hi) noexcept {
    if (hi < lo) return 0.0;
    const __m256d n = _mm256_set1_pd(static_cast<double>(len));
    const __m256d step = _mm256_set1_pd(4.0);
    __m256d jv = _mm256_setr_pd(static_cast<double>(lo), static_cast<double>(lo + 1),
                                static_cast<double>(lo + 2), static_cast<double>(lo + 3));
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = lo;
    for (; j + 3 <= hi; j += 4) {
        const __m256d xv = _mm256_loadu_pd(x + j);
        // y[len - j], ..., y[len - j - 3]
        const __m256d yr = _mm256_loadu_pd(y + (len - j - 3));
        const __m256d yv = _mm256_permute4x64_pd(yr, 0x1B);
        const __m256d w = _mm256_mul_pd(jv, _mm256_sub_pd(n, jv));
        const __m256d d = _mm256_sub_pd(xv, yv);
        const __m256d wd = _mm256_mul_pd(w, d);
        acc = _mm256_fmadd_pd(wd, wd, acc);
        jv = _mm256_add_pd(jv, step);
    }
    double s = hsum(acc);
    const double nd = static_cast<double>(len);
    for (; j <= hi; ++j) {
        const double fj = static_cast<double>(j);
        const double w = fj * (nd - fj);
        const double d = x[j] - y[len - j];
        s += w * w * d * d;
    }
    return s;
}

double max_split_ratio(const PathMoments& m, std::size_t a, std::size_t c, std::size_t k_lo,
                       std::size_t k_hi, double scale) noexcept {
    const double wa = m.w[a];
    const double span = m.w[c] - wa;
    const double outer = static_cast<double>(c - a);
    const __m256d wav = _mm256_set1_pd(wa);
    const __m256d av = _mm256_set1_pd(static_cast<double>(a));
    const __m256d scv = _mm256_set1_pd(scale);
    const __m256d zero = _mm256_setzero_pd();
    __m256d best = _mm256_set1_pd(-1.0);
    __m256d kv = _mm256_setr_pd(static_cast<double>(k_lo), static_cast<double>(k_lo + 1),
                                static_cast<double>(k_lo + 2), static_cast<double>(k_lo + 3));
    const __m256d step = _mm256_set1_pd(4.0);
    std::size_t k = k_lo;
    for (; k + 3 <= k_hi; k += 4) {
        const __m256d wk = _mm256_loadu_pd(m.w.data() + k);
        const __m256d s1k = _mm256_loadu_pd(m.s1.data() + k);
        const __m256d s2k = _mm256_loadu_pd(m.s2.data() + k);
        const __m256d sjk = _mm256_loadu_pd(m.sj.data() + k);
        // Same operation order as the scalar kernel's (k - a) / outer * span.
        const __m256d frac = _mm256_div_pd(_mm256_sub_pd(kv, av), _mm256_set1_pd(outer));
        const __m256d b = _mm256_sub_pd(_mm256_sub_pd(wk, wav), _mm256_mul_pd(frac, _mm256_set1_pd(span)));
        const __m256d e1 = energy_from_fixed_start(m, a, kv, wk, s1k, s2k, sjk);
        const __m256d e2 = energy_to_fixed_end(m, kv, wk, s1k, s2k, sjk, c);
        const __m256d den = _mm256_add_pd(e1, e2);
        const __m256d ok = _mm256_cmp_pd(den, zero, _CMP_GT_OQ);
        const __m256d r = _mm256_div_pd(_mm256_mul_pd(scv, _mm256_mul_pd(b, b)), den);
        best = _mm256_max_pd(best, _mm256_blendv_pd(best, r, ok));
        kv = _mm256_add_pd(kv, step);
    }
    double result = hmax(best);
    if (k <= k_hi) {
        const double tail = scalar::max_split_ratio(m, a, c, k, k_hi, scale);
        if (tail > result) result = tail;
    }
    return result;
}

}  // namespace tailshift::kernels::avx2
