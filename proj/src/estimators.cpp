#include "tailshift/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tailshift/error.hpp"

namespace tailshift {

namespace {

void check_level(double p) {
    require(p > 0.0 && p < 1.0, ErrorCategory::InvalidInput, "probability level p must lie in (0,1)");
}

void check_segment(std::span<const double> segment) {
    require(!segment.empty(), ErrorCategory::InvalidInput, "empty segment");
}

// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double x) noexcept {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    double value() const noexcept { return sum + c; }
};

double order_statistic(std::span<const double> segment, std::size_t rank) {
    std::vector<double> tmp(segment.begin(), segment.end());
    auto nth = tmp.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(tmp.begin(), nth, tmp.end());
    return *nth;
}

}  // namespace

std::size_t var_rank(std::size_t len, double p) {
    const double x = static_cast<double>(len) * p;
    const double r = std::ceil(x - 1e-12 * std::max(1.0, x));
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(r, 1.0)), 1, len);
}

double empirical_cdf(std::span<const double> segment, double x) {
    check_segment(segment);
    const auto c = std::count_if(segment.begin(), segment.end(), [x](double v) { return v <= x; });
    return static_cast<double>(c) / static_cast<double>(segment.size());
}

double var_estimate(std::span<const double> segment, double p) {
    check_segment(segment);
    check_level(p);
    return order_statistic(segment, var_rank(segment.size(), p));
}

double es_estimate(std::span<const double> segment, double p) {
    check_segment(segment);
    check_level(p);
    const double var = order_statistic(segment, var_rank(segment.size(), p));
    CompensatedSum s;
    for (double x : segment) {
        if (x >= var) s.add(x);
    }
    return s.value() / ((1.0 - p) * static_cast<double>(segment.size()));
}

double ctm_estimate(std::span<const double> segment, double p, double beta) {
    check_segment(segment);
    check_level(p);
    require(std::isfinite(beta) && beta > 0.0, ErrorCategory::InvalidInput, "CTM exponent must be positive");
    const bool integral = beta == std::floor(beta);
    const double var = order_statistic(segment, var_rank(segment.size(), p));
    CompensatedSum s;
    for (double x : segment) {
        if (x < var) continue;
        if (x < 0.0 && !integral) {
            fail(ErrorCategory::InvalidInput, "negative base with fractional CTM exponent");
        }
        s.add(beta == 1.0 ? x : std::pow(x, beta));
    }
    return s.value() / ((1.0 - p) * static_cast<double>(segment.size()));
}

// ---------------------------------------------------------------------------
// TailIndex

TailIndex::TailIndex(std::span<const double> values) : TailIndex(values, values) {}

TailIndex::TailIndex(std::span<const double> values, std::span<const double> weights) {
    const std::size_t n = values.size();
    require(weights.size() == n, ErrorCategory::InvalidInput, "tail index weights must match the values");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    sorted_.resize(n);
    weight_.resize(n);
    rank_of_.resize(n);
    tie_start_.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        sorted_[r] = values[order[r]];
        weight_[r] = weights[order[r]];
        rank_of_[order[r]] = r;
        tie_start_[r] = (r > 0 && sorted_[r] == sorted_[r - 1]) ? tie_start_[r - 1] : r;
    }
    count_tree_.assign(n + 1, 0);
    sum_tree_.assign(n + 1, 0.0);
    while (top_bit_ * 2 <= n) top_bit_ *= 2;
}

void TailIndex::clear() {
    std::fill(count_tree_.begin(), count_tree_.end(), 0);
    std::fill(sum_tree_.begin(), sum_tree_.end(), 0.0);
    inserted_ = 0;
}

void TailIndex::insert(std::size_t position) {
    const std::size_t r = rank_of_[position];
    const double v = weight_[r];
    for (std::size_t i = slot_of_rank(r) + 1; i < count_tree_.size(); i += i & (~i + 1)) {
        count_tree_[i] += 1;
        sum_tree_[i] += v;
    }
    ++inserted_;
}

TailIndex::Tail TailIndex::query(double p) const {
    require(inserted_ > 0, ErrorCategory::InvalidInput, "query on an empty tail index");
    check_level(p);
    const std::size_t k = var_rank(inserted_, p);
    // k-th smallest inserted = (inserted - k + 1)-th in descending-rank slots.
    std::size_t target = inserted_ - k + 1;
    std::size_t pos = 0;
    for (std::size_t step = top_bit_; step > 0; step /= 2) {
        const std::size_t next = pos + step;
        if (next < count_tree_.size() && count_tree_[next] < target) {
            pos = next;
            target -= count_tree_[next];
        }
    }
    // pos is the number of slots before the answer; slot index = pos (0-based).
    const std::size_t rank = sorted_.size() - 1 - pos;
    const std::size_t last_slot = slot_of_rank(tie_start_[rank]);

    Tail t;
    t.var = sorted_[rank];
    for (std::size_t i = last_slot + 1; i > 0; i -= i & (~i + 1)) {
        t.exceedance_count += count_tree_[i];
        t.exceedance_sum += sum_tree_[i];
    }
    return t;
}

double TailIndex::es(double p) const {
    const Tail t = query(p);
    return t.exceedance_sum / ((1.0 - p) * static_cast<double>(inserted_));
}

std::size_t TailIndex::count_up_to_rank(std::size_t rank) const {
    // Ascending-rank prefix = inserted minus the descending-slot prefix above it.
    std::size_t above = 0;
    const std::size_t slots_above = sorted_.size() - 1 - rank;  // slots 0..slots_above-1
    for (std::size_t i = slots_above; i > 0; i -= i & (~i + 1)) above += count_tree_[i];
    return inserted_ - above;
}

TailIndex build_tail_index(const TimeSeries& series) { return TailIndex(series.values()); }

std::string_view risk_measure_name(RiskMeasure m) noexcept {
    switch (m) {
        case RiskMeasure::VaR: return "var";
        case RiskMeasure::ES: return "es";
        case RiskMeasure::CTM: return "ctm";
    }
    return "unknown";
}

RiskMeasure parse_risk_measure(std::string_view s) {
    if (s == "var") return RiskMeasure::VaR;
    if (s == "es") return RiskMeasure::ES;
    if (s == "ctm") return RiskMeasure::CTM;
    fail(ErrorCategory::InvalidInput, "unknown risk measure '" + std::string(s) + "' (expected var, es or ctm)");
}

double estimate(std::span<const double> segment, RiskMeasure measure, double p, double beta) {
    switch (measure) {
        case RiskMeasure::VaR: return var_estimate(segment, p);
        case RiskMeasure::ES: return es_estimate(segment, p);
        case RiskMeasure::CTM: return ctm_estimate(segment, p, beta);
    }
    return 0.0;
}

std::vector<double> prefix_estimates(std::span<const double> values, RiskMeasure measure, double p,
                                     double beta) {
    check_segment(values);
    check_level(p);
    std::vector<double> weights(values.begin(), values.end());
    if (measure == RiskMeasure::CTM) {
        require(std::isfinite(beta) && beta > 0.0, ErrorCategory::InvalidInput, "CTM exponent must be positive");
        for (double& w : weights) w = beta == 1.0 ? w : std::pow(w, beta);
    }
    TailIndex idx(values, weights);
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        idx.insert(i);
        const TailIndex::Tail t = idx.query(p);
        if (measure == RiskMeasure::VaR) {
            out[i] = t.var;
            continue;
        }
        if (std::isnan(t.exceedance_sum)) {
            fail(ErrorCategory::InvalidInput, "negative base with fractional CTM exponent");
        }
        out[i] = t.exceedance_sum / ((1.0 - p) * static_cast<double>(i + 1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Prefix / suffix arrays

std::size_t default_min_segment(double p) {
    check_level(p);
    const double x = 1.0 / (1.0 - p);
    return static_cast<std::size_t>(std::ceil(x - 1e-9 * x)) + 1;
}

std::optional<double> EsPrefixArrays::prefix(std::size_t i) const {
    if (i < 1 || i > n || std::isnan(prefix_es[i])) return std::nullopt;
    return prefix_es[i];
}

std::optional<double> EsPrefixArrays::suffix(std::size_t i) const {
    if (i < 1 || i > n || std::isnan(suffix_es[i])) return std::nullopt;
    return suffix_es[i];
}

EsPrefixArrays es_prefix_suffix(const TimeSeries& series, double p, std::size_t i_min) {
    check_level(p);
    require(i_min >= 1, ErrorCategory::InvalidInput, "minimum segment length must be at least 1");
    const std::size_t n = series.size();
    require(n >= i_min, ErrorCategory::TooShort,
            "series of length " + std::to_string(n) + " is shorter than the minimum segment length " +
                std::to_string(i_min));

    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    EsPrefixArrays a;
    a.n = n;
    a.i_min = i_min;
    a.p = p;
    a.prefix_es.assign(n + 2, nan);
    a.suffix_es.assign(n + 2, nan);

    TailIndex idx(series.values());
    for (std::size_t i = 1; i <= n; ++i) {
        idx.insert(i - 1);
        if (i >= i_min) a.prefix_es[i] = idx.es(p);
    }
    idx.clear();
    for (std::size_t i = n; i >= 1; --i) {
        idx.insert(i - 1);
        if (n - i + 1 >= i_min) a.suffix_es[i] = idx.es(p);
    }
    a.full = a.prefix_es[n];

    const double nd = static_cast<double>(n);
    a.prefix_m0.assign(n + 2, 0.0);
    a.prefix_m1.assign(n + 2, 0.0);
    a.prefix_m2.assign(n + 2, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        double w = 0.0, d = 0.0;
        if (i >= i_min) {
            w = (static_cast<double>(i) / nd) * (static_cast<double>(i) / nd);
            d = a.prefix_es[i] - a.full;
        }
        a.prefix_m0[i] = a.prefix_m0[i - 1] + w;
        a.prefix_m1[i] = a.prefix_m1[i - 1] + w * d;
        a.prefix_m2[i] = a.prefix_m2[i - 1] + w * d * d;
    }
    a.suffix_m0.assign(n + 2, 0.0);
    a.suffix_m1.assign(n + 2, 0.0);
    a.suffix_m2.assign(n + 2, 0.0);
    for (std::size_t i = n; i >= 1; --i) {
        double w = 0.0, d = 0.0;
        if (n - i + 1 >= i_min) {
            const double f = static_cast<double>(n - i + 1) / nd;
            w = f * f;
            d = a.suffix_es[i] - a.full;
        }
        a.suffix_m0[i] = a.suffix_m0[i + 1] + w;
        a.suffix_m1[i] = a.suffix_m1[i + 1] + w * d;
        a.suffix_m2[i] = a.suffix_m2[i + 1] + w * d * d;
    }
    return a;
}

// ---------------------------------------------------------------------------
// Segment table

SegmentEsTable::SegmentEsTable(std::span<const double> values, double p) : n_(values.size()), p_(p) {
    check_level(p);
    require(n_ >= 1, ErrorCategory::InvalidInput, "empty series");
    end_off_.assign(n_ + 2, 0);
    start_off_.assign(n_ + 2, 0);
    // Run for anchor e holds e + 1 slots (slot 0 unused).
    for (std::size_t e = 1; e <= n_; ++e) end_off_[e + 1] = end_off_[e] + e + 1;
    for (std::size_t a = 1; a <= n_; ++a) start_off_[a + 1] = start_off_[a] + (n_ - a + 1) + 1;
    end_.assign(end_off_[n_ + 1], 0.0);
    start_.assign(start_off_[n_ + 1], 0.0);
    end_off_.resize(n_ + 1);
    start_off_.resize(n_ + 1);

    TailIndex idx(values);
    for (std::size_t e = 1; e <= n_; ++e) {
        idx.clear();
        double* run = end_.data() + end_off_[e];
        for (std::size_t len = 1; len <= e; ++len) {
            idx.insert(e - len);
            const double v = idx.es(p);
            run[len] = v;
            start_[start_off_[e - len + 1] + len] = v;
        }
    }
}

SegmentEsTable SegmentEsTable::reversed() const {
    // Reversed series Y_i = X_{n+1-i}: a run starting at a in Y is the run
    // ending at n+1-a in X, with identical lengths.
    SegmentEsTable t;
    t.n_ = n_;
    t.p_ = p_;
    t.start_.resize(end_.size());
    t.end_.resize(start_.size());
    t.start_off_.assign(n_ + 1, 0);
    t.end_off_.assign(n_ + 1, 0);
    std::size_t off = 0;
    for (std::size_t a = 1; a <= n_; ++a) {
        const std::size_t len = n_ - a + 1;
        t.start_off_[a] = off;
        std::copy_n(end_.data() + end_off_[n_ + 1 - a], len + 1, t.start_.data() + off);
        off += len + 1;
    }
    off = 0;
    for (std::size_t e = 1; e <= n_; ++e) {
        t.end_off_[e] = off;
        std::copy_n(start_.data() + start_off_[n_ + 1 - e], e + 1, t.end_.data() + off);
        off += e + 1;
    }
    return t;
}

double segment_es(const TimeSeries& series, SegmentRef seg, double p, SegmentBackend backend) {
    seg.validate(series.size());
    check_level(p);
    if (backend == SegmentBackend::Naive) {
        return es_estimate(series.values().subspan(seg.l - 1, seg.length()), p);
    }
    TailIndex idx(series.values());
    for (std::size_t i = seg.l; i <= seg.m; ++i) idx.insert(i - 1);
    return idx.es(p);
}

}  // namespace tailshift
