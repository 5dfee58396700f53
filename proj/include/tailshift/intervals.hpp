#pragma once

// Confidence intervals for tail risk measures without standard-error
// estimation: sectioning (t_{m-1} pivot over per-section estimates) and
// self-normalization (ratio pivot over the prefix-estimate path).

#include <cstddef>
#include <string_view>
#include <vector>

#include "tailshift/estimators.hpp"
#include "tailshift/limitsim.hpp"
#include "tailshift/series.hpp"

namespace tailshift {

enum class IntervalMethod { Sectioning, SelfNorm };

std::string_view interval_method_name(IntervalMethod m) noexcept;
IntervalMethod parse_interval_method(std::string_view s);

struct IntervalResult {
    IntervalMethod method = IntervalMethod::Sectioning;
    RiskMeasure measure = RiskMeasure::ES;
    double level = 0.95;
    double point = 0.0;   // full-sample estimate
    double center = 0.0;  // section mean (sectioning) or the point (self-normalized)
    double lo = 0.0;
    double hi = 0.0;

    // Sectioning: m, section length, the per-section estimates, S and t quantile.
    std::size_t sections = 0;
    std::size_t section_length = 0;
    std::size_t dropped = 0;
    std::vector<double> section_estimates;
    double dispersion = 0.0;
    double t_quantile = 0.0;

    // Self-normalization: V_n, the critical value and the skipped prefix terms.
    double vn = 0.0;
    double critical_value = 0.0;
    std::size_t i_min = 0;
    std::size_t skipped_terms = 0;

    // t = sqrt(m) (center - reference) / S, for pivot diagnostics.
    double t_statistic(double reference) const;
};

// Splits the first m * floor(n / m) observations into m equal sections,
// estimates on each and returns center +/- t_{m-1,(1+level)/2} S / sqrt(m).
// Lower-tail specs are handled by negation; bounds are mapped back.
IntervalResult sectioning_interval(const TimeSeries& series, const RiskSpec& spec, std::size_t m = 10,
                                   double level = 0.95, RiskMeasure measure = RiskMeasure::ES);

// V_n = sqrt( (1/n) sum_{i=i_min}^{n} (i/n)^2 (est_{1:i} - est_n)^2 ), interval
// est_n +/- c V_n with c the level-quantile of |W(1)| / (int bridge^2)^{1/2}.
// i_min = 0 selects default_min_segment(p).
IntervalResult selfnorm_interval(const TimeSeries& series, const RiskSpec& spec, double level,
                                 const CriticalValueTable& critvals, std::size_t i_min = 0,
                                 RiskMeasure measure = RiskMeasure::ES);

// Kolmogorov-Smirnov distance between a sample and the t_df distribution.
double ks_distance_to_t(std::vector<double> sample, double df);

}  // namespace tailshift
