#pragma once

// Plug-in tail-risk estimators on full samples and segments.
//
//   VaR^(p) = inf{x : F^(x) >= p}, the ceil(len * p)-th order statistic
//   ES^(p)  = 1/(1-p) * 1/len * sum_i X_i 1{X_i >= VaR^(p)}
//   CTM^(p, beta) = 1/(1-p) * 1/len * sum_i X_i^beta 1{X_i >= VaR^(p)}
//
// The indicator includes every observation tied with VaR^, so under ties ES^
// is not a conditional mean: ES^ of the constant series c at level p is
// c/(1-p) * (count/len), e.g. 10 for [5,5,5,5] at p = 0.5.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tailshift/series.hpp"

namespace tailshift {

// ceil(len * p) clamped to [1, len], with a relative guard so that exactly
// integral products (p = 0.9, len = 10) do not round up.
std::size_t var_rank(std::size_t len, double p);

double empirical_cdf(std::span<const double> segment, double x);
double var_estimate(std::span<const double> segment, double p);
double es_estimate(std::span<const double> segment, double p);
double ctm_estimate(std::span<const double> segment, double p, double beta);

enum class RiskMeasure { VaR, ES, CTM };

std::string_view risk_measure_name(RiskMeasure m) noexcept;
RiskMeasure parse_risk_measure(std::string_view s);

// Dispatches to the estimators above; beta is only read for CTM.
double estimate(std::span<const double> segment, RiskMeasure measure, double p, double beta = 1.0);

// Order-statistic index over the values of one series: a rank mapping from a
// stable sort plus Fenwick trees of counts and value sums over rank space.
// Values are inserted by their position in the series. The sum tree holds
// the values themselves, or per-position weights (X_i^beta for CTM) when given.
class TailIndex {
public:
    explicit TailIndex(std::span<const double> values);
    TailIndex(std::span<const double> values, std::span<const double> weights);

    struct Tail {
        double var = 0.0;
        double exceedance_sum = 0.0;     // sum of (weights of) inserted values >= var
        std::size_t exceedance_count = 0;
    };

    void insert(std::size_t position);  // 0-based position in the series
    void clear();
    std::size_t size() const noexcept { return inserted_; }
    std::size_t capacity() const noexcept { return sorted_.size(); }

    Tail query(double p) const;
    double es(double p) const;

    // Prefix count over ranks (ascending order), for invariant checks.
    std::size_t count_up_to_rank(std::size_t rank) const;

private:
    std::size_t slot_of_rank(std::size_t rank) const noexcept { return sorted_.size() - 1 - rank; }

    std::vector<double> sorted_;           // values by ascending rank
    std::vector<double> weight_;           // rank -> summed quantity
    std::vector<std::size_t> rank_of_;     // position -> rank
    std::vector<std::size_t> tie_start_;   // rank -> lowest rank with equal value
    std::vector<std::size_t> count_tree_;  // Fenwick over descending-rank slots
    std::vector<double> sum_tree_;
    std::size_t inserted_ = 0;
    std::size_t top_bit_ = 1;
};

TailIndex build_tail_index(const TimeSeries& series);

// Estimates on every prefix X_1..X_i, i = 1..n (0-based vector, entry i-1),
// in O(n log n).
std::vector<double> prefix_estimates(std::span<const double> values, RiskMeasure measure, double p,
                                     double beta = 1.0);

// ES^ on every prefix X_1..X_i (i >= i_min) and every suffix X_i..X_n
// (n - i + 1 >= i_min), with weighted cumulative moments centred at the
// full-sample estimate c:
//   prefix_m0[i] = sum_{j=i_min}^{i} (j/n)^2
//   prefix_m1[i] = sum (j/n)^2 (ES^_{1:j} - c)
//   prefix_m2[i] = sum (j/n)^2 (ES^_{1:j} - c)^2
// and the mirrored suffix sums over j = i..n-i_min+1 with weights ((n-j+1)/n)^2.
// All arrays are 1-based with n + 2 entries; absent estimates are NaN.
struct EsPrefixArrays {
    std::size_t n = 0;
    std::size_t i_min = 1;
    double p = 0.0;
    double full = 0.0;

    std::vector<double> prefix_es, suffix_es;
    std::vector<double> prefix_m0, prefix_m1, prefix_m2;
    std::vector<double> suffix_m0, suffix_m1, suffix_m2;

    std::optional<double> prefix(std::size_t i) const;  // ES^_{1:i}
    std::optional<double> suffix(std::size_t i) const;  // ES^_{i:n}
};

// ceil(1/(1-p)) + 1.
std::size_t default_min_segment(double p);

EsPrefixArrays es_prefix_suffix(const TimeSeries& series, double p, std::size_t i_min);

// ES^ on every segment, stored twice so that both "fixed start, growing
// length" and "fixed end, growing length" runs are contiguous:
//   from_start(a)[len] = ES^_{a : a+len-1},   len = 1..n-a+1
//   to_end(e)[len]     = ES^_{e-len+1 : e},   len = 1..e
// (index 0 of every run is unused). O(n^2) memory, O(n^2 log n) build.
class SegmentEsTable {
public:
    SegmentEsTable(std::span<const double> values, double p);

    std::size_t size() const noexcept { return n_; }
    double p() const noexcept { return p_; }
    const double* from_start(std::size_t a) const noexcept { return start_.data() + start_off_[a]; }
    const double* to_end(std::size_t e) const noexcept { return end_.data() + end_off_[e]; }
    double es(std::size_t l, std::size_t m) const noexcept { return from_start(l)[m - l + 1]; }

    // Table of the time-reversed series, obtained by swapping the two runs.
    SegmentEsTable reversed() const;

private:
    SegmentEsTable() = default;

    std::size_t n_ = 0;
    double p_ = 0.0;
    std::vector<double> start_, end_;
    std::vector<std::size_t> start_off_, end_off_;
};

enum class SegmentBackend { Naive, Indexed };

// ES^ on X_l..X_m. Naive extracts and sorts; Indexed replays the segment
// through a TailIndex (the offline order-statistic route).
double segment_es(const TimeSeries& series, SegmentRef seg, double p,
                  SegmentBackend backend = SegmentBackend::Naive);

}  // namespace tailshift
