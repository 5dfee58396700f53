#include "tailshift/kernels.hpp"

namespace tailshift::kernels {

double bridge_energy(const PathMoments& m, std::size_t a, std::size_t b) noexcept {
    const double len = static_cast<double>(b - a);
    const double wa = m.w[a];
    const double a1 = m.s1[b] - m.s1[a];
    const double a2 = m.s2[b] - m.s2[a];
    const double aj = m.sj[b] - m.sj[a];
    const double sv2 = a2 - 2.0 * wa * a1 + len * wa * wa;
    const double sjv = aj - static_cast<double>(a) * a1 - wa * 0.5 * len * (len - 1.0);
    const double sjj = (len - 1.0) * len * (2.0 * len - 1.0) / 6.0;
    const double g = (m.w[b] - wa) / len;
    return sv2 - 2.0 * g * sjv + g * g * sjj;
}

namespace scalar {

double bridge_contrast(const double* x, const double* y, std::size_t len, std::size_t lo,
                       std::size_t hi) noexcept {
    double acc = 0.0;
    const double n = static_cast<double>(len);
    for (std::size_t j = lo; j <= hi; ++j) {
        const double fj = static_cast<double>(j);
        const double w = fj * (n - fj);
        const double d = x[j] - y[len - j];
        acc += w * w * d * d;
    }
    return acc;
}

double max_split_ratio(const PathMoments& m, std::size_t a, std::size_t c, std::size_t k_lo,
                       std::size_t k_hi, double scale) noexcept {
    const double wa = m.w[a];
    const double span = m.w[c] - wa;
    const double outer = static_cast<double>(c - a);
    double best = -1.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        const double b = (m.w[k] - wa) - (static_cast<double>(k - a) / outer) * span;
        const double den = bridge_energy(m, a, k) + bridge_energy(m, k, c);
        if (!(den > 0.0)) continue;
        const double r = scale * b * b / den;
        if (r > best) best = r;
    }
    return best;
}

}  // namespace scalar
}  // namespace tailshift::kernels
