#include "tailshift/tdist.hpp"

#include <cmath>
#include <limits>

#include "tailshift/error.hpp"

namespace tailshift {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kEps = 1e-16;

double beta_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    require(a > 0.0 && b > 0.0, ErrorCategory::InvalidInput, "incomplete beta needs a, b > 0");
    require(x >= 0.0 && x <= 1.0, ErrorCategory::InvalidInput, "incomplete beta needs x in [0, 1]");
    if (x == 0.0 || x == 1.0) return x;
    const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                       b * std::log1p(-x);
    const double front = std::exp(lbt);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
    return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double x, double df) {
    require(df > 0.0, ErrorCategory::InvalidInput, "degrees of freedom must be positive");
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + x * x));
    return x > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double q, double df) {
    require(df > 0.0, ErrorCategory::InvalidInput, "degrees of freedom must be positive");
    require(q > 0.0 && q < 1.0, ErrorCategory::InvalidInput, "quantile level must lie in (0,1)");
    if (q == 0.5) return 0.0;
    // Solve P(T > x) = tail for x > 0; min(q, 1 - q) is exact for doubles.
    const double tail = q < 0.5 ? q : 1.0 - q;
    const auto upper = [df](double x) { return 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + x * x)); };

    double lo = 0.0;
    double hi = 1.0;
    while (upper(hi) > tail) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) return q < 0.5 ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();
    }
    for (int i = 0; i < 60 && hi - lo > 1e-3 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (upper(mid) > tail ? lo : hi) = mid;
    }
    const double lc = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * M_PI);
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 50; ++i) {
        const double pdf = std::exp(lc - 0.5 * (df + 1.0) * std::log1p(x * x / df));
        const double step = (upper(x) - tail) / pdf;
        double next = x + step;
        if (next <= lo || next >= hi) next = 0.5 * (x + (step > 0 ? hi : lo));
        (next > x ? lo : hi) = x;
        if (std::abs(next - x) <= 1e-15 * std::abs(x)) {
            x = next;
            break;
        }
        x = next;
    }
    return q < 0.5 ? -x : x;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double normal_quantile(double q) {
    require(q > 0.0 && q < 1.0, ErrorCategory::InvalidInput, "quantile level must lie in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    double x;
    if (q < 0.02425) {
        const double t = std::sqrt(-2.0 * std::log(q));
        x = (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
            ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    } else if (q > 1.0 - 0.02425) {
        const double t = std::sqrt(-2.0 * std::log1p(-q));
        x = -(((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
            ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    } else {
        const double u = q - 0.5;
        const double r = u * u;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    // Newton on the nearer tail so that levels close to 0 or 1 keep precision.
    const bool upper = q > 0.5;
    const double tail = upper ? 1.0 - q : q;
    double z = upper ? -x : x;
    for (int i = 0; i < 3; ++i) {
        const double err = normal_cdf(z) - tail;
        z -= err / normal_pdf(z);
    }
    return upper ? -z : z;
}

}  // namespace tailshift
