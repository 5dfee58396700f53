#include "tailshift/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tailshift/error.hpp"
#include "tailshift/estimators.hpp"
#include "tailshift/kernels.hpp"

namespace tailshift {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Denominators at or below this fraction of the squared data scale are
// treated as zero: constant data leaves only rounding noise in them.
constexpr double kDegenerateFraction = 1e-20;

double data_scale(std::span<const double> x, double p) {
    double s = 0.0;
    for (double v : x) s = std::max(s, std::abs(v));
    s /= 1.0 - p;
    return s * s;
}

// Weighted sum of (d_i - c)^2 from moments m0 = sum w, m1 = sum w d, m2 = sum w d^2.
double centred(double m0, double m1, double m2, double c) { return std::max(0.0, m2 - 2.0 * c * m1 + c * c * m0); }

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

TrimPolicy TrimPolicy::defaults(double p) {
    TrimPolicy t;
    t.i_min = default_min_segment(p);
    t.n_min = std::max<std::size_t>(t.i_min, 8);
    return t;
}

void TrimPolicy::validate() const {
    require(i_min >= 1 && n_min >= i_min, ErrorCategory::InvalidInput, "trim policy needs n_min >= i_min >= 1");
}

GnResult gn_statistic(const TimeSeries& series, const RiskSpec& spec, const TrimPolicy& trim) {
    trim.validate();
    const UpperTailView view = to_upper_tail(series, spec);
    const double p = view.effective_p;
    const std::size_t n = series.size();
    require(n >= 2 * trim.n_min, ErrorCategory::TooShort,
            "series of length " + std::to_string(n) + " is too short for the single test (needs " +
                std::to_string(2 * trim.n_min) + ")");

    const EsPrefixArrays a = es_prefix_suffix(view.series, p, trim.i_min);
    const double nd = static_cast<double>(n);
    const double floor = kDegenerateFraction * data_scale(view.series.values(), p);

    GnResult r;
    r.trim = trim;
    const std::size_t count = n - 2 * trim.n_min + 1;
    r.trace.k.reserve(count);
    r.trace.numerator.reserve(count);
    r.trace.denominator.reserve(count);
    r.trace.ratio.reserve(count);

    double best = -1.0;
    double best_num = -1.0;
    for (std::size_t k = trim.n_min; k <= n - trim.n_min; ++k) {
        const double t = static_cast<double>(k) / nd;
        const double pk = a.prefix_es[k];
        const double qk = a.suffix_es[k + 1];
        const double diff = pk - qk;
        const double num = t * t * (1.0 - t) * (1.0 - t) * diff * diff;
        const double den = (centred(a.prefix_m0[k], a.prefix_m1[k], a.prefix_m2[k], pk - a.full) +
                            centred(a.suffix_m0[k + 1], a.suffix_m1[k + 1], a.suffix_m2[k + 1], qk - a.full)) /
                           nd;
        const double ratio = den > floor ? num / den : kNan;
        r.trace.k.push_back(k);
        r.trace.numerator.push_back(num);
        r.trace.denominator.push_back(den);
        r.trace.ratio.push_back(ratio);
        if (num > best_num) {
            best_num = num;
            r.trace.cusum_argmax = k;
        }
        if (ratio > best) {
            best = ratio;
            r.argmax = k;
        }
    }
    if (best < 0.0) {
        throw DegenerateError("single test is degenerate: every self-normalizer vanishes", view.negated ? -a.full : a.full);
    }
    r.value = best;
    return r;
}

std::string_view hn_mode_name(HnMode m) noexcept { return m == HnMode::Grid ? "grid" : "full"; }

HnMode parse_hn_mode(std::string_view s) {
    if (s == "grid") return HnMode::Grid;
    if (s == "full") return HnMode::Full;
    fail(ErrorCategory::InvalidInput, "unknown mode '" + std::string(s) + "' (expected grid or full)");
}

namespace {

// Evaluates C/D for forward-indexed pairs (k1, k2) on one orientation of the
// segment table. `shrink` = 2 applies the printed backward normaliser
// (k1 - 2)^2 in place of k1^2 on the first D sum.
class SideEvaluator {
public:
    SideEvaluator(const SegmentEsTable& table, std::size_t i_min, std::size_t shrink, double floor)
        : t_(table), i_min_(i_min), shrink_(shrink), floor_(floor), t1_(table.size() + 1, kNan) {}

    double first_sum(std::size_t k1) {
        if (std::isnan(t1_[k1])) t1_[k1] = contrast(1, k1, k1);
        return t1_[k1];
    }

    // Returns false when the candidate is skipped.
    bool evaluate(std::size_t k1, std::size_t k2, double& c, double& d) {
        const std::size_t len = k2 - k1;
        const double left = t_.from_start(1)[k1];
        const double right = t_.from_start(k1 + 1)[len];
        const double k1d = static_cast<double>(k1);
        const double k2d = static_cast<double>(k2);
        const double ld = static_cast<double>(len);
        c = k1d * k1d * ld * ld / (k2d * k2d * k2d) * (left - right) * (left - right);
        if (k1 <= shrink_) return false;
        const double norm1 = static_cast<double>(k1 - shrink_);
        d = (first_sum(k1) / (norm1 * norm1) + contrast(k1 + 1, k2, len) / (ld * ld)) / (k2d * k2d);
        return d > floor_;
    }

private:
    // sum_{j=i_min}^{len-i_min} j^2 (len-j)^2 (ES^_{a:a+j-1} - ES^_{a+j:e})^2
    double contrast(std::size_t a, std::size_t e, std::size_t len) const {
        if (len < 2 * i_min_) return 0.0;
        return kernels::bridge_contrast(t_.from_start(a), t_.to_end(e), len, i_min_, len - i_min_);
    }

    const SegmentEsTable& t_;
    std::size_t i_min_;
    std::size_t shrink_;
    double floor_;
    std::vector<double> t1_;
};

}  // namespace

HnResult hn_statistic(const TimeSeries& series, const RiskSpec& spec, double delta, HnMode mode, std::size_t i_min,
                      bool keep_trace) {
    require(delta > 0.0 && delta < 1.0 / 3.0, ErrorCategory::InvalidInput, "delta must lie in (0, 1/3)");
    const UpperTailView view = to_upper_tail(series, spec);
    const double p = view.effective_p;
    const std::size_t n = series.size();
    if (i_min == 0) i_min = default_min_segment(p);
    require(static_cast<double>(n) * delta >= 2.0 * static_cast<double>(i_min), ErrorCategory::TooShort,
            "series of length " + std::to_string(n) + " is too short for the multiple test at delta " +
                short_number(delta) + " (needs n delta >= " + std::to_string(2 * i_min) + ")");

    HnResult r;
    r.i_min = i_min;
    const std::size_t m = delta_index_trim(delta, n);
    r.index_trim = m;
    require(3 * m <= n, ErrorCategory::TooShort, "delta leaves no admissible split pair");

    const double floor = kDegenerateFraction * data_scale(view.series.values(), p);
    const SegmentEsTable table(view.series.values(), p);
    const SegmentEsTable mirror = table.reversed();
    SideEvaluator fwd(table, i_min, 0, floor);
    SideEvaluator bwd(mirror, i_min, 2, floor);

    std::vector<std::size_t> outer;
    if (mode == HnMode::Grid) {
        for (double g : coarse_grid(delta)) outer.push_back(grid_index(g, n));
    } else {
        for (std::size_t v = m; v <= n; ++v) outer.push_back(v);
    }

    double best_f = -1.0;
    double best_b = -1.0;
    auto consider = [&](bool forward, std::size_t first, std::size_t second, double c, double d, bool ok) {
        ++r.candidates;
        if (keep_trace) r.trace.push_back({forward, first, second, c, ok ? d : kNan});
        if (!ok) {
            ++r.skipped;
            return;
        }
        const double ratio = c / d;
        if (forward && ratio > best_f) {
            best_f = ratio;
            r.forward_k1 = first;
            r.forward_k2 = second;
        } else if (!forward && ratio > best_b) {
            best_b = ratio;
            r.backward_j1 = first;
            r.backward_j2 = second;
        }
    };

    // Forward: s2 on the outer set, s1 over every admissible index.
    for (std::size_t k2 : outer) {
        if (k2 < 2 * m || k2 + m > n) continue;
        for (std::size_t k1 = m; k1 + m <= k2; ++k1) {
            double c = 0.0, d = 0.0;
            const bool ok = fwd.evaluate(k1, k2, c, d);
            consider(true, k1, k2, c, d, ok);
        }
    }
    // Backward: t1 on the outer set, t2 over every admissible index; evaluated
    // as a forward pair on the reversed series.
    for (std::size_t j1 : outer) {
        if (j1 < m || j1 + 2 * m > n) continue;
        for (std::size_t j2 = j1 + m; j2 + m <= n; ++j2) {
            double c = 0.0, d = 0.0;
            const bool ok = bwd.evaluate(n + 1 - j2, n + 1 - j1, c, d);
            consider(false, j1, j2, c, d, ok);
        }
    }

    if (best_f < 0.0 || best_b < 0.0) {
        const double full = table.from_start(1)[n];
        throw DegenerateError("multiple test is degenerate: every self-normalizer vanishes",
                              view.negated ? -full : full);
    }
    r.forward = best_f;
    r.backward = best_b;
    r.value = best_f + best_b;
    return r;
}

TestResult single_test(const TimeSeries& series, const RiskSpec& spec, double level, const TrimPolicy& trim,
                       const CriticalValueTable& critvals) {
    require(level > 0.0 && level < 1.0, ErrorCategory::InvalidInput, "significance level must lie in (0,1)");
    require(critvals.functional.id == FunctionalId::G, ErrorCategory::MissingTable,
            "the single test needs a g critical-value table, got " + critvals.key());
    TestResult t;
    t.test = "single";
    t.level = level;
    t.table_key = critvals.key();
    t.critical_value = critvals.quantile(1.0 - level);
    t.side = spec.side;
    t.p = to_upper_tail(series, spec).effective_p;
    t.n = series.size();
    GnResult g = gn_statistic(series, spec, trim);
    t.statistic = g.value;
    t.location = g.argmax;
    t.reject = t.statistic > t.critical_value;
    t.single = std::move(g);
    return t;
}

TestResult multiple_test(const TimeSeries& series, const RiskSpec& spec, double level, double delta,
                         const CriticalValueTable& critvals, std::size_t i_min, bool keep_trace) {
    require(level > 0.0 && level < 1.0, ErrorCategory::InvalidInput, "significance level must lie in (0,1)");
    require(critvals.functional.id == FunctionalId::Htilde, ErrorCategory::MissingTable,
            "the multiple test needs an htilde critical-value table, got " + critvals.key());
    require(std::abs(critvals.functional.param - delta) <= 1e-12, ErrorCategory::MissingTable,
            "critical-value table " + critvals.key() + " was built for delta " +
                short_number(critvals.functional.param) + ", not " + short_number(delta));
    TestResult t;
    t.test = "multiple";
    t.level = level;
    t.delta = delta;
    t.table_key = critvals.key();
    t.critical_value = critvals.quantile(1.0 - level);
    t.side = spec.side;
    t.p = to_upper_tail(series, spec).effective_p;
    t.n = series.size();
    HnResult h = hn_statistic(series, spec, delta, HnMode::Grid, i_min, keep_trace);
    t.statistic = h.value;
    t.reject = t.statistic > t.critical_value;
    t.multiple = std::move(h);
    return t;
}

}  // namespace tailshift
