#pragma once

// Retrospective change-point tests for expected shortfall.
//
// Single change: G_n = max over k of
//   t^2 (1-t)^2 (ES^_{1:k} - ES^_{k+1:n})^2 / V_n(k),   t = k/n,
//   V_n(k) = n^-1 sum_{i<=k} (i/n)^2 (ES^_{1:i} - ES^_{1:k})^2
//          + n^-1 sum_{i>k} ((n-i+1)/n)^2 (ES^_{i:n} - ES^_{k+1:n})^2.
//
// Multiple changes: H~_n = sup C_f/D_f + sup C_b/D_b over the trimmed set
// with one index restricted to the coarse grid {(1 + k delta)/2}:
//   C_f = k1^2 (k2-k1)^2 / k2^3 (ES^_{1:k1} - ES^_{k1+1:k2})^2
//   D_f = sum_{i<=k1} i^2 (k1-i)^2 / (k2^2 k1^2) (ES^_{1:i} - ES^_{i+1:k1})^2
//       + sum_{k1<i<=k2} (i-1-k1)^2 (k2-i+1)^2 / (k2^2 (k2-k1)^2)
//                        (ES^_{k1+1:i-1} - ES^_{i:k2})^2
// and the backward pair (C_b, D_b) in the mirrored indices. D_b is
// implemented with its (n - [nt2] - 1)^2 factor exactly as printed, although
// the forward/backward symmetry suggests n - [nt2] + 1.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tailshift/limitsim.hpp"
#include "tailshift/series.hpp"

namespace tailshift {

struct TrimPolicy {
    std::size_t n_min = 8;  // outer split: both sides keep at least n_min points
    std::size_t i_min = 1;  // inner segments shorter than this are skipped in D sums

    // n_min = max(ceil(1/(1-p)) + 1, 8), i_min = ceil(1/(1-p)) + 1.
    static TrimPolicy defaults(double p);
    void validate() const;
};

struct SingleTrace {
    std::vector<std::size_t> k;
    std::vector<double> numerator;
    std::vector<double> denominator;
    std::vector<double> ratio;  // NaN where the denominator vanished
    std::size_t cusum_argmax = 0;
};

struct GnResult {
    double value = 0.0;
    std::size_t argmax = 0;
    TrimPolicy trim;
    SingleTrace trace;
};

GnResult gn_statistic(const TimeSeries& series, const RiskSpec& spec, const TrimPolicy& trim);

enum class HnMode { Grid, Full };
std::string_view hn_mode_name(HnMode m) noexcept;
HnMode parse_hn_mode(std::string_view s);

// One (k1, k2) candidate in forward indices; backward candidates are stored
// in data indices (j1, j2) = ([n t1], [n t2]).
struct HnCandidate {
    bool forward = true;
    std::size_t first = 0;
    std::size_t second = 0;
    double c = 0.0;
    double d = 0.0;
};

struct HnResult {
    double value = 0.0;
    double forward = 0.0;
    double backward = 0.0;
    std::size_t forward_k1 = 0, forward_k2 = 0;
    std::size_t backward_j1 = 0, backward_j2 = 0;
    std::size_t index_trim = 0;  // m = ceil(n delta)
    std::size_t i_min = 0;
    std::size_t candidates = 0;
    std::size_t skipped = 0;     // candidates with a vanishing denominator
    std::vector<HnCandidate> trace;
};

// i_min = 0 selects default_min_segment(p). With keep_trace every evaluated
// candidate is recorded (O(n) entries in grid mode, O(n^2) in full mode).
HnResult hn_statistic(const TimeSeries& series, const RiskSpec& spec, double delta, HnMode mode = HnMode::Grid,
                      std::size_t i_min = 0, bool keep_trace = false);

struct TestResult {
    std::string test;  // "single" or "multiple"
    double statistic = 0.0;
    double critical_value = 0.0;
    double level = 0.05;
    bool reject = false;
    std::optional<std::size_t> location;
    std::string table_key;

    double p = 0.0;          // effective upper-tail level
    TailSide side = TailSide::Upper;
    std::size_t n = 0;

    std::optional<GnResult> single;
    std::optional<HnResult> multiple;
    double delta = 0.0;
};

// Rejects when G_n exceeds the (1 - level) quantile of the G table.
TestResult single_test(const TimeSeries& series, const RiskSpec& spec, double level, const TrimPolicy& trim,
                       const CriticalValueTable& critvals);

// Rejects when the grid statistic exceeds the (1 - level) quantile of the
// H~ table; the table's delta must equal `delta`.
TestResult multiple_test(const TimeSeries& series, const RiskSpec& spec, double level, double delta,
                         const CriticalValueTable& critvals, std::size_t i_min = 0, bool keep_trace = false);

}  // namespace tailshift
