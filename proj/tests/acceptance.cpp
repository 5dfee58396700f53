// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   acceptance [--cache-dir DIR] [--threads T]
//
// Critical-value tables (M = 10000 paths, N = 5000 steps, seed 7) are loaded
// from DIR or simulated and stored there on first use.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "changepoint_oracles.hpp"
#include "oracles.hpp"
#include "tailshift/changepoint.hpp"
#include "tailshift/dgp.hpp"
#include "tailshift/estimators.hpp"
#include "tailshift/experiments.hpp"
#include "tailshift/limitsim.hpp"
#include "tailshift/table_io.hpp"

using namespace tailshift;

namespace {

constexpr std::size_t kPaths = 10000;
constexpr std::size_t kSteps = 5000;
constexpr std::uint64_t kTableSeed = 7;

struct Context {
    TableCache cache;
    unsigned threads = 0;

    CriticalValueTable table(const FunctionalSpec& f) const {
        const std::vector<double> qs = default_quantile_levels();
        return cache.get_or_simulate(f, kSteps, kPaths, kTableSeed, qs, threads);
    }
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

class Report {
public:
    void line(int id, bool pass, const std::string& what, double seconds) {
        std::printf("criterion %d %s: %s [%.1f s]\n", id, pass ? "PASS" : "FAIL", what.c_str(), seconds);
        std::fflush(stdout);
        failures_ += pass ? 0 : 1;
    }
    int failures() const { return failures_; }

private:
    int failures_ = 0;
};

double rate(const ExperimentReport& r, double grid, const std::string& metric) {
    const ReportRow* row = r.find(grid, metric);
    return row ? row->value : std::nan("");
}

double stderr_of(const ExperimentReport& r, double grid, const std::string& metric) {
    const ReportRow* row = r.find(grid, metric);
    return row ? row->std_error : std::nan("");
}

bool within(double x, double lo, double hi) { return x >= lo && x <= hi; }

bool rel_close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

ExperimentConfig config(ExperimentId id, DgpSpec dgp, std::vector<double> grid, std::size_t reps, unsigned threads) {
    ExperimentConfig c;
    c.id = id;
    c.dgp = dgp;
    c.grid = std::move(grid);
    c.replications = reps;
    c.seed = 2024;
    c.threads = threads;
    return c;
}

// 1. Critical values of G and H~ against the published thresholds.
bool critical_values(const Context& ctx, std::string& what) {
    const double g = ctx.table({FunctionalId::G, 0.0275}).quantile(0.95);
    const double h10 = ctx.table({FunctionalId::Htilde, 0.10}).quantile(0.95);
    const double h05 = ctx.table({FunctionalId::Htilde, 0.05}).quantile(0.95);
    const bool g_ok = std::abs(g / 40.1 - 1.0) <= 0.05;
    const bool h_ok = std::abs(h10 / 138.19 - 1.0) <= 0.05 || std::abs(h05 / 138.19 - 1.0) <= 0.05;
    what = "G q95 " + fmt("%.3f", g) + " (40.1 +-5%), H~ q95 delta 0.10 " + fmt("%.3f", h10) + ", delta 0.05 " +
           fmt("%.3f", h05) + " (138.19 +-5%, delta 0.10 frozen)";
    return g_ok && h_ok;
}

// 2. Null rejection rates of both tests.
bool null_levels(const Context& ctx, const ExperimentReport& ar_power, const ExperimentReport& multi,
                 std::string& what) {
    ExperimentTables t;
    t.g = ctx.table({FunctionalId::G, 0.0275});
    auto c = config(ExperimentId::PowerLocation, DgpSpec::arch1(1.0, 0.3, 0, 0), {0.0}, 1000, ctx.threads);
    c.n = 400;
    c.spec = RiskSpec(0.9);
    const double arch = rate(run_power_location(c, t), 0.0, "reject_single");
    const double ar = rate(ar_power, 0.0, "reject_single");
    const double mult = rate(multi, 16.5, "reject_multiple");
    what = "single AR(1) " + fmt("%.3f", ar) + ", ARCH(1) " + fmt("%.3f", arch) + " in [0.025, 0.075]; multiple " +
           fmt("%.3f", mult) + " <= 0.10";
    return within(ar, 0.025, 0.075) && within(arch, 0.025, 0.075) && mult <= 0.10;
}

// 3. Power over location shifts.
bool power_shape(const ExperimentReport& r, std::string& what) {
    const std::vector<double> shifts{0.0, 0.5, 1.0, 2.0, 3.0};
    bool monotone = true;
    std::ostringstream os;
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        const double v = rate(r, shifts[i], "reject_single");
        os << (i ? ", " : "") << fmt("%.3f", v);
        if (i == 0) continue;
        const double prev = rate(r, shifts[i - 1], "reject_single");
        const double se = std::hypot(stderr_of(r, shifts[i], "reject_single"), stderr_of(r, shifts[i - 1], "reject_single"));
        monotone = monotone && v >= prev - 2.0 * se;
    }
    const double top = rate(r, 3.0, "reject_single");
    what = "rates at shifts 0,0.5,1,2,3: " + os.str() + (monotone ? " nondecreasing" : " NOT nondecreasing") +
           "; shift 3 " + fmt("%.3f", top) + " >= 0.9";
    return monotone && top >= 0.9;
}

// 4. Multiple vs single test on the three-regime process.
bool multiple_vs_single(const ExperimentReport& r, std::string& what) {
    const double m = rate(r, 2.1, "reject_multiple"), s = rate(r, 2.1, "reject_single");
    what = "v = 2.1: multiple " + fmt("%.3f", m) + " >= 0.6, single " + fmt("%.3f", s) + " <= 0.2";
    return m >= 0.6 && s <= 0.2;
}

// 5. Interval coverage.
bool coverage(const Context& ctx, std::string& what) {
    ExperimentTables t;
    t.lobato = ctx.table({FunctionalId::LobatoPivot, 0.0});
    auto c = config(ExperimentId::Coverage, DgpSpec::ar1(0.5, 0, 0), {200, 2000}, 2000, ctx.threads);
    c.spec = RiskSpec(0.95);
    c.level = 0.95;
    const auto r = run_coverage(c, t);
    const double sn = rate(r, 2000, "coverage_selfnorm");
    const double s200 = rate(r, 200, "coverage_sectioning"), s2000 = rate(r, 2000, "coverage_sectioning");
    what = "self-normalized n=2000 " + fmt("%.4f", sn) + " in [0.92, 0.97]; sectioning n=200 " + fmt("%.4f", s200) +
           " < n=2000 " + fmt("%.4f", s2000);
    return within(sn, 0.92, 0.97) && s200 < s2000;
}

// 6. Sectioning pivot against t_9.
bool pivot_distribution(const Context& ctx, std::string& what) {
    auto c = config(ExperimentId::TStatHist, DgpSpec::ar1(0.5, 0, 0), {1200}, 5000, ctx.threads);
    c.spec = RiskSpec(0.95);
    c.level = 0.95;
    const auto r = run_tstat_hist(c);
    const double ks = rate(r, 1200, "ks_distance");
    what = "KS distance to t_9 " + fmt("%.4f", ks) + " < 0.05 (mean pivot " + fmt("%.3f", rate(r, 1200, "mean_tstat")) +
           ")";
    return ks < 0.05;
}

// 7. Optimized statistics and arrays against brute-force recomputation.
bool oracle_equivalence(std::string& what) {
    std::mt19937_64 gen(17);
    const double ps[] = {0.5, 0.6, 0.75, 0.8, 0.9};
    std::size_t bad_g = 0, bad_h = 0, bad_arrays = 0;
    double worst = 0.0;
    auto track = [&](double a, double b) {
        const double r = std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
        worst = std::max(worst, r);
        return r <= 1e-9;
    };
    for (int s = 0; s < 200; ++s) {
        const std::size_t n = 60 + gen() % 141;
        const double p = ps[gen() % 5];
        const auto x = oracle::random_series(gen, n, s % 4 == 0);
        const TimeSeries ts(x);

        TrimPolicy trim;
        trim.i_min = 1 + gen() % 3;
        trim.n_min = std::max<std::size_t>(trim.i_min, 8);
        const auto g = gn_statistic(ts, RiskSpec(p), trim);
        const auto bg = oracle::brute_gn(x, p, trim);
        if (!track(g.value, bg.value)) ++bad_g;

        const double delta = s % 2 ? 0.1 : 0.15;
        const std::size_t i_min = 1 + gen() % 3;
        const auto h = hn_statistic(ts, RiskSpec(p), delta, HnMode::Grid, i_min);
        const auto bh = oracle::brute_hn(x, p, delta, i_min, false);
        if (!track(h.forward, bh.forward) || !track(h.backward, bh.backward)) ++bad_h;

        const std::size_t a_min = default_min_segment(p);
        const auto arr = es_prefix_suffix(ts, p, a_min);
        bool ok = true;
        for (std::size_t i = a_min; i <= n; ++i) ok = track(*arr.prefix(i), oracle::es_seg(x, 1, i, p)) && ok;
        for (std::size_t i = 1; n - i + 1 >= a_min; ++i) ok = track(*arr.suffix(i), oracle::es_seg(x, i, n, p)) && ok;
        if (!ok) ++bad_arrays;
    }
    what = "200 series: G_n mismatches " + std::to_string(bad_g) + ", grid H~_n mismatches " + std::to_string(bad_h) +
           ", prefix/suffix mismatches " + std::to_string(bad_arrays) + ", worst relative error " + fmt("%.2e", worst);
    return bad_g == 0 && bad_h == 0 && bad_arrays == 0;
}

// 8. Large-sample estimates against closed forms.
bool closed_forms(std::string& what) {
    const auto z = generate(DgpSpec::ar1(0.0, 1000000, 31));
    const double es = es_estimate(z.values(), 0.95);
    const auto a = generate(DgpSpec::ar1(0.5, 1000000, 32));
    const double var = var_estimate(a.values(), 0.95);
    const auto h = generate(DgpSpec::arch1(1.0, 0.3, 1000000, 33));
    double m = 0.0, v = 0.0;
    for (double x : h.values()) m += x;
    m /= static_cast<double>(h.size());
    for (double x : h.values()) v += (x - m) * (x - m);
    v /= static_cast<double>(h.size() - 1);
    const double target = 1.0 / 0.7;
    what = "ES(0.95) normal " + fmt("%.4f", es) + " vs 2.0627, VaR(0.95) AR(1) " + fmt("%.4f", var) +
           " vs 1.8994, ARCH(1) variance " + fmt("%.4f", v) + " vs " + fmt("%.4f", target);
    return std::abs(es - 2.0627) <= 0.02 && std::abs(var - 1.8994) <= 0.02 && std::abs(v / target - 1.0) <= 0.05;
}

// 9. Scale invariance, scale equivariance, determinism under parallelism.
bool invariants(const Context& ctx, std::string& what) {
    std::mt19937_64 gen(23);
    bool scale_ok = true, equi_ok = true;
    const double dyadic[] = {0.5, 2.0, 1024.0};
    const double other[] = {3.7, 1e-3, 123.456};
    for (int s = 0; s < 20; ++s) {
        const auto x = oracle::random_series(gen, 150);
        const TimeSeries ts(x);
        const RiskSpec spec(0.8);
        TrimPolicy trim = TrimPolicy::defaults(0.8);
        const double g = gn_statistic(ts, spec, trim).value;
        const double h = hn_statistic(ts, spec, 0.1).value;
        for (double l : dyadic) {
            const TimeSeries y = ts.scaled(l);
            scale_ok = scale_ok && gn_statistic(y, spec, trim).value == g && hn_statistic(y, spec, 0.1).value == h;
            equi_ok = equi_ok && es_estimate(y.values(), 0.8) == l * es_estimate(x, 0.8) &&
                      var_estimate(y.values(), 0.8) == l * var_estimate(x, 0.8);
        }
        for (double l : other) {
            const TimeSeries y = ts.scaled(l);
            scale_ok = scale_ok && rel_close(gn_statistic(y, spec, trim).value, g, 1e-12) &&
                       rel_close(hn_statistic(y, spec, 0.1).value, h, 1e-12);
            equi_ok = equi_ok && rel_close(es_estimate(y.values(), 0.8), l * es_estimate(x, 0.8), 1e-14) &&
                      var_estimate(y.values(), 0.8) == l * var_estimate(x, 0.8);
        }
    }

    const std::vector<double> qs{0.5, 0.95};
    const auto t1 = estimate_quantiles({FunctionalId::Htilde, 0.1}, 300, 400, qs, 5, 1);
    const auto t4 = estimate_quantiles({FunctionalId::Htilde, 0.1}, 300, 400, qs, 5, 4);
    const auto l1 = estimate_quantiles({FunctionalId::LobatoPivot}, 300, 400, qs, 5, 1);
    const auto l3 = estimate_quantiles({FunctionalId::LobatoPivot}, 300, 400, qs, 5, 3);
    bool det = t1.quantiles == t4.quantiles && l1.quantiles == l3.quantiles;

    ExperimentTables t;
    t.g = ctx.table({FunctionalId::G, 0.0275});
    t.lobato = ctx.table({FunctionalId::LobatoPivot, 0.0});
    auto c = config(ExperimentId::PowerLocation, DgpSpec::arch1(1.0, 0.3, 0, 0), {0.0, 1.0}, 60, 1);
    c.spec = RiskSpec(0.9);
    const std::string p1 = run_power_location(c, t).to_csv();
    c.threads = 5;
    det = det && p1 == run_power_location(c, t).to_csv();
    auto cv = config(ExperimentId::Coverage, DgpSpec::ar1(0.5, 0, 0), {400}, 60, 1);
    cv.level = 0.95;
    const std::string c1 = run_coverage(cv, t).to_csv();
    cv.threads = 6;
    det = det && c1 == run_coverage(cv, t).to_csv();
    const TimeSeries r1 = generate(DgpSpec::three_regime_ar1(2.1, 900, 3));
    const TimeSeries r2 = generate(DgpSpec::three_regime_ar1(2.1, 900, 3));
    det = det && std::equal(r1.values().begin(), r1.values().end(), r2.values().begin(), r2.values().end());

    what = std::string("G_n/H~_n scale invariance ") + (scale_ok ? "ok" : "VIOLATED") + ", VaR/ES equivariance " +
           (equi_ok ? "ok" : "VIOLATED") + ", seeded determinism across thread counts " + (det ? "ok" : "VIOLATED");
    return scale_ok && equi_ok && det;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cache_dir;
    unsigned threads = 0;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--cache-dir") && i + 1 < argc) {
            cache_dir = argv[++i];
        } else if (!std::strcmp(argv[i], "--threads") && i + 1 < argc) {
            threads = static_cast<unsigned>(std::stoul(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: acceptance [--cache-dir DIR] [--threads T]\n");
            return 2;
        }
    }
    const Context ctx{cache_dir.empty() ? TableCache() : TableCache(cache_dir), threads};
    Report report;

    auto timed = [&](int id, const std::function<bool(std::string&)>& f) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string what;
        bool pass = false;
        try {
            pass = f(what);
        } catch (const std::exception& e) {
            what = std::string("error: ") + e.what();
        }
        report.line(id, pass, what, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    };

    ExperimentReport ar_power, multi;
    auto run_shared = [&] {
        ExperimentTables t;
        t.g = ctx.table({FunctionalId::G, 0.0275});
        auto c = config(ExperimentId::PowerLocation, DgpSpec::ar1(0.5, 0, 0), {0.0, 0.5, 1.0, 2.0, 3.0}, 1000,
                        ctx.threads);
        c.n = 400;
        c.spec = RiskSpec(0.9);
        ar_power = run_power_location(c, t);

        ExperimentTables tm;
        tm.g = ctx.table({FunctionalId::G, 0.014});
        tm.htilde = ctx.table({FunctionalId::Htilde, 0.10});
        auto m = config(ExperimentId::PowerMulti, DgpSpec::ar1(0.5, 0, 0), {16.5, 2.1}, 100, ctx.threads);
        m.dgp.df = 16.5;
        m.n = 1500;
        m.spec = RiskSpec(0.95);
        multi = run_power_multi(m, tm);
    };

    timed(1, [&](std::string& w) { return critical_values(ctx, w); });
    timed(2, [&](std::string& w) {
        run_shared();
        return null_levels(ctx, ar_power, multi, w);
    });
    timed(3, [&](std::string& w) { return power_shape(ar_power, w); });
    timed(4, [&](std::string& w) { return multiple_vs_single(multi, w); });
    timed(5, [&](std::string& w) { return coverage(ctx, w); });
    timed(6, [&](std::string& w) { return pivot_distribution(ctx, w); });
    timed(7, [&](std::string& w) { return oracle_equivalence(w); });
    timed(8, [&](std::string& w) { return closed_forms(w); });
    timed(9, [&](std::string& w) { return invariants(ctx, w); });

    std::printf("%d of 9 criteria failed\n", report.failures());
    return report.failures() == 0 ? 0 : 1;
}
