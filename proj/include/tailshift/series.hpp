#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tailshift {

// Ordered, finite observations with optional opaque date labels.
// Construction validates; instances are immutable afterwards.
class TimeSeries {
public:
    explicit TimeSeries(std::vector<double> values);
    TimeSeries(std::vector<double> values, std::vector<std::string> timestamps);

    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    bool has_timestamps() const noexcept { return !timestamps_.empty(); }
    const std::vector<std::string>& timestamps() const noexcept { return timestamps_; }

    // 1-based, inclusive [first, last].
    TimeSeries slice(std::size_t first, std::size_t last) const;
    TimeSeries reversed() const;
    TimeSeries scaled(double factor) const;
    TimeSeries negated() const { return scaled(-1.0); }

private:
    std::vector<double> values_;
    std::vector<std::string> timestamps_;
};

enum class TailSide { Upper, Lower };

struct RiskSpec {
    double p = 0.95;
    TailSide side = TailSide::Upper;
    std::optional<double> beta;

    RiskSpec() = default;
    RiskSpec(double p, TailSide side = TailSide::Upper, std::optional<double> beta = std::nullopt);
};

// 1-based inclusive segment X_l..X_m.
struct SegmentRef {
    std::size_t l = 1;
    std::size_t m = 1;

    std::size_t length() const noexcept { return m - l + 1; }
    void validate(std::size_t series_length) const;
};

struct UpperTailView {
    TimeSeries series;
    double effective_p;
    bool negated;
};

// Lower-tail analysis is negation plus level complement; results computed on
// the returned series must be sign-flipped back by the caller when negated.
UpperTailView to_upper_tail(const TimeSeries& series, const RiskSpec& spec);

// r_i = ln(P_{i+1} / P_i). Timestamps, if present, are those of P_{i+1}.
TimeSeries log_returns(const TimeSeries& prices);

std::string_view tail_side_name(TailSide side) noexcept;
TailSide parse_tail_side(std::string_view s);

}  // namespace tailshift
