#include "tailshift/series.hpp"

#include <algorithm>
#include <cmath>

#include "tailshift/error.hpp"

namespace tailshift {

std::string_view category_name(ErrorCategory c) noexcept {
    switch (c) {
        case ErrorCategory::InvalidInput: return "invalid_input";
        case ErrorCategory::TooShort: return "too_short";
        case ErrorCategory::Degenerate: return "degenerate";
        case ErrorCategory::MissingTable: return "missing_table";
        case ErrorCategory::Io: return "io";
    }
    return "unknown";
}

namespace {

void check_values(const std::vector<double>& v) {
    require(!v.empty(), ErrorCategory::InvalidInput, "time series must contain at least one value");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            fail(ErrorCategory::InvalidInput,
                 "non-finite value at position " + std::to_string(i + 1));
        }
    }
}

}  // namespace

TimeSeries::TimeSeries(std::vector<double> values) : values_(std::move(values)) {
    check_values(values_);
}

TimeSeries::TimeSeries(std::vector<double> values, std::vector<std::string> timestamps)
    : values_(std::move(values)), timestamps_(std::move(timestamps)) {
    check_values(values_);
    if (timestamps_.empty()) return;
    require(timestamps_.size() == values_.size(), ErrorCategory::InvalidInput,
            "timestamps and values differ in length");
    // Labels are opaque; "strictly increasing" is checked lexicographically,
    // which holds for ISO dates.
    for (std::size_t i = 1; i < timestamps_.size(); ++i) {
        if (!(timestamps_[i - 1] < timestamps_[i])) {
            fail(ErrorCategory::InvalidInput,
                 "timestamps not strictly increasing at position " + std::to_string(i + 1));
        }
    }
}

TimeSeries TimeSeries::slice(std::size_t first, std::size_t last) const {
    SegmentRef{first, last}.validate(size());
    std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(first - 1),
                          values_.begin() + static_cast<std::ptrdiff_t>(last));
    if (timestamps_.empty()) return TimeSeries(std::move(v));
    std::vector<std::string> ts(timestamps_.begin() + static_cast<std::ptrdiff_t>(first - 1),
                                timestamps_.begin() + static_cast<std::ptrdiff_t>(last));
    return TimeSeries(std::move(v), std::move(ts));
}

TimeSeries TimeSeries::reversed() const {
    std::vector<double> v(values_.rbegin(), values_.rend());
    // Reversed labels would violate the ordering invariant; drop them.
    return TimeSeries(std::move(v));
}

TimeSeries TimeSeries::scaled(double factor) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= factor;
    if (timestamps_.empty()) return TimeSeries(std::move(v));
    return TimeSeries(std::move(v), timestamps_);
}

RiskSpec::RiskSpec(double p_, TailSide side_, std::optional<double> beta_)
    : p(p_), side(side_), beta(beta_) {
    require(p > 0.0 && p < 1.0, ErrorCategory::InvalidInput, "probability level p must lie in (0,1)");
    if (beta) {
        require(std::isfinite(*beta) && *beta > 0.0, ErrorCategory::InvalidInput,
                "CTM exponent beta must be positive");
    }
}

void SegmentRef::validate(std::size_t series_length) const {
    if (!(l >= 1 && l <= m && m <= series_length)) {
        fail(ErrorCategory::InvalidInput, "invalid segment [" + std::to_string(l) + ", " +
                                              std::to_string(m) + "] for series of length " +
                                              std::to_string(series_length));
    }
}

UpperTailView to_upper_tail(const TimeSeries& series, const RiskSpec& spec) {
    if (spec.side == TailSide::Upper) return {series, spec.p, false};
    return {series.negated(), 1.0 - spec.p, true};
}

TimeSeries log_returns(const TimeSeries& prices) {
    require(prices.size() >= 2, ErrorCategory::TooShort, "log returns need at least two prices");
    const auto v = prices.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) {
            fail(ErrorCategory::InvalidInput,
                 "non-positive price at position " + std::to_string(i + 1));
        }
    }
    std::vector<double> r(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) r[i] = std::log(v[i + 1] / v[i]);
    if (!prices.has_timestamps()) return TimeSeries(std::move(r));
    std::vector<std::string> ts(prices.timestamps().begin() + 1, prices.timestamps().end());
    return TimeSeries(std::move(r), std::move(ts));
}

std::string_view tail_side_name(TailSide side) noexcept {
    return side == TailSide::Upper ? "upper" : "lower";
}

TailSide parse_tail_side(std::string_view s) {
    if (s == "upper") return TailSide::Upper;
    if (s == "lower") return TailSide::Lower;
    fail(ErrorCategory::InvalidInput, "tail side must be 'upper' or 'lower'");
}

}  // namespace tailshift
