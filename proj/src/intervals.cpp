#include "tailshift/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tailshift/error.hpp"
#include "tailshift/tdist.hpp"

namespace tailshift {

namespace {

// Dispersions at or below this fraction of the estimates' magnitude are
// rounding noise from equal estimates.
constexpr double kRelativeFloor = 1e-12;

void check_coverage(double level) {
    require(level > 0.0 && level < 1.0, ErrorCategory::InvalidInput, "coverage level must lie in (0,1)");
}

double beta_of(const RiskSpec& spec) { return spec.beta.value_or(1.0); }

}  // namespace

std::string_view interval_method_name(IntervalMethod m) noexcept {
    return m == IntervalMethod::Sectioning ? "sectioning" : "selfnorm";
}

IntervalMethod parse_interval_method(std::string_view s) {
    if (s == "sectioning") return IntervalMethod::Sectioning;
    if (s == "selfnorm") return IntervalMethod::SelfNorm;
    fail(ErrorCategory::InvalidInput, "unknown interval method '" + std::string(s) + "' (expected sectioning or selfnorm)");
}

double IntervalResult::t_statistic(double reference) const {
    return std::sqrt(static_cast<double>(sections)) * (center - reference) / dispersion;
}

IntervalResult sectioning_interval(const TimeSeries& series, const RiskSpec& spec, std::size_t m, double level,
                                   RiskMeasure measure) {
    check_coverage(level);
    require(m >= 2, ErrorCategory::InvalidInput, "sectioning needs m >= 2 sections");
    const UpperTailView view = to_upper_tail(series, spec);
    const double p = view.effective_p;
    const std::size_t n = series.size();
    const std::size_t need = default_min_segment(p) - 1;  // ceil(1/(1-p))
    const std::size_t len = n / m;
    require(len >= need && len >= 1, ErrorCategory::TooShort,
            "series of length " + std::to_string(n) + " is too short for " + std::to_string(m) +
                " sections (each needs at least " + std::to_string(need) + " points)");

    IntervalResult r;
    r.method = IntervalMethod::Sectioning;
    r.measure = measure;
    r.level = level;
    r.sections = m;
    r.section_length = len;
    r.dropped = n - m * len;

    const auto x = view.series.values();
    r.point = estimate(x, measure, p, beta_of(spec));
    r.section_estimates.resize(m);
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        r.section_estimates[i] = estimate(x.subspan(i * len, len), measure, p, beta_of(spec));
        mean += r.section_estimates[i];
    }
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double v : r.section_estimates) ss += (v - mean) * (v - mean);
    r.center = mean;
    r.dispersion = std::sqrt(ss / static_cast<double>(m - 1));
    r.t_quantile = student_t_quantile(0.5 * (1.0 + level), static_cast<double>(m - 1));
    if (view.negated) {
        r.center = -r.center;
        r.point = -r.point;
        for (double& v : r.section_estimates) v = -v;
    }
    // Equal section estimates leave only rounding noise in S.
    double scale = 0.0;
    for (double v : r.section_estimates) scale = std::max(scale, std::abs(v));
    if (!(r.dispersion > kRelativeFloor * scale)) {
        throw DegenerateError("sectioning interval is degenerate: all section estimates are equal", r.center);
    }
    const double half = r.t_quantile * r.dispersion / std::sqrt(static_cast<double>(m));
    r.lo = r.center - half;
    r.hi = r.center + half;
    return r;
}

IntervalResult selfnorm_interval(const TimeSeries& series, const RiskSpec& spec, double level,
                                 const CriticalValueTable& critvals, std::size_t i_min, RiskMeasure measure) {
    check_coverage(level);
    require(critvals.functional.id == FunctionalId::LobatoPivot, ErrorCategory::MissingTable,
            "self-normalized intervals need a lobato critical-value table, got " + critvals.key());
    const UpperTailView view = to_upper_tail(series, spec);
    const double p = view.effective_p;
    const std::size_t n = series.size();
    if (i_min == 0) i_min = default_min_segment(p);
    require(n >= i_min, ErrorCategory::TooShort,
            "series of length " + std::to_string(n) + " is shorter than the minimum segment length " +
                std::to_string(i_min));

    IntervalResult r;
    r.method = IntervalMethod::SelfNorm;
    r.measure = measure;
    r.level = level;
    r.i_min = i_min;
    r.skipped_terms = i_min - 1;
    r.critical_value = critvals.quantile(level);

    const std::vector<double> prefix = prefix_estimates(view.series.values(), measure, p, beta_of(spec));
    const double full = prefix[n - 1];
    const double nd = static_cast<double>(n);
    double acc = 0.0;
    double scale = 0.0;
    for (std::size_t i = i_min; i <= n; ++i) {
        scale = std::max(scale, std::abs(prefix[i - 1]));
        const double w = static_cast<double>(i) / nd;
        const double d = prefix[i - 1] - full;
        acc += w * w * d * d;
    }
    r.vn = std::sqrt(acc / nd);
    r.point = view.negated ? -full : full;
    r.center = r.point;
    if (!(r.vn > kRelativeFloor * scale)) {
        throw DegenerateError("self-normalized interval is degenerate: prefix estimates are constant", r.center);
    }
    r.lo = full - r.critical_value * r.vn;
    r.hi = full + r.critical_value * r.vn;
    if (view.negated) {
        const double lo = -r.hi;
        r.hi = -r.lo;
        r.lo = lo;
    }
    return r;
}

double ks_distance_to_t(std::vector<double> sample, double df) {
    require(!sample.empty(), ErrorCategory::InvalidInput, "KS distance of an empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = student_t_cdf(sample[i], df);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

}  // namespace tailshift
