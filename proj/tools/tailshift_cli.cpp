// tailshift: command-line front end. Every command prints one JSON document
// on stdout; failures print {"error": {...}} and exit with a category code.

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tailshift/changepoint.hpp"
#include "tailshift/cli_io.hpp"
#include "tailshift/dgp.hpp"
#include "tailshift/error.hpp"
#include "tailshift/estimators.hpp"
#include "tailshift/experiments.hpp"
#include "tailshift/intervals.hpp"
#include "tailshift/limitsim.hpp"
#include "tailshift/table_io.hpp"

using json = nlohmann::ordered_json;
using namespace tailshift;

namespace {

constexpr const char* kSchema = "tailshift/1";

int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::InvalidInput: return 2;
        case ErrorCategory::TooShort: return 3;
        case ErrorCategory::Degenerate: return 4;
        case ErrorCategory::MissingTable: return 5;
        case ErrorCategory::Io: return 6;
    }
    return 1;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct InputOptions {
    std::string path;
    std::string column = "2";
    std::string date_column;
    bool no_header = false;
    bool returns = false;

    void add(CLI::App* app) {
        app->add_option("--input", path, "CSV file")->required();
        app->add_option("--column", column, "value column: header name or 1-based position")
            ->capture_default_str();
        app->add_option("--date-column", date_column, "date column kept as opaque labels");
        app->add_flag("--no-header", no_header, "the first line is data");
        app->add_flag("--returns", returns, "convert prices to log returns first");
    }

    TimeSeries load() const {
        CsvOptions o;
        o.value = ColumnSelector::parse(column);
        if (!date_column.empty()) o.date = ColumnSelector::parse(date_column);
        o.has_header = !no_header;
        TimeSeries s = read_csv(path, o);
        return returns ? log_returns(s) : s;
    }

    json describe() const {
        return json{{"path", path}, {"column", column}, {"date_column", date_column.empty() ? json(nullptr) : json(date_column)},
                    {"header", !no_header}, {"log_returns", returns}};
    }
};

struct RiskOptions {
    double p = 0.95;
    std::string tail = "upper";
    std::string measure = "es";
    double beta = 1.0;

    void add(CLI::App* app, bool with_measure) {
        app->add_option("--p", p, "probability level in (0,1)")->capture_default_str();
        app->add_option("--tail", tail, "upper or lower")->capture_default_str();
        if (with_measure) {
            app->add_option("--measure", measure, "var, es or ctm")->capture_default_str();
            app->add_option("--beta", beta, "CTM exponent")->capture_default_str();
        }
    }

    RiskSpec spec() const {
        const RiskMeasure m = parse_risk_measure(measure);
        return RiskSpec(p, parse_tail_side(tail), m == RiskMeasure::CTM ? std::optional<double>(beta) : std::nullopt);
    }

    json describe() const {
        json j{{"p", p}, {"tail", tail}, {"measure", measure}};
        if (measure == "ctm") j["beta"] = beta;
        return j;
    }
};

struct TableOptions {
    std::string cache_dir;
    std::size_t paths = 10000;
    std::size_t steps = 5000;
    std::uint64_t seed = 7;
    bool simulate_missing = false;

    void add(CLI::App* app) {
        app->add_option("--cache-dir", cache_dir, "critical-value table directory (default $TAILSHIFT_CACHE_DIR)");
        app->add_option("--paths", paths, "Monte Carlo paths of the table")->capture_default_str();
        app->add_option("--steps", steps, "steps per path of the table")->capture_default_str();
        app->add_option("--table-seed", seed, "master seed of the table")->capture_default_str();
        app->add_flag("--simulate-missing", simulate_missing, "simulate and cache an absent table");
    }

    TableCache cache() const { return cache_dir.empty() ? TableCache() : TableCache(cache_dir); }

    CriticalValueTable fetch(const FunctionalSpec& f, double q) const {
        const TableCache c = cache();
        if (simulate_missing) {
            const std::vector<double> qs = [&] {
                auto v = default_quantile_levels();
                v.push_back(q);
                return v;
            }();
            return c.get_or_simulate(f, steps, paths, seed, qs);
        }
        auto t = c.load(f, steps, paths, seed);
        if (!t) {
            CriticalValueTable k;
            k.functional = f;
            k.steps = steps;
            k.paths = paths;
            k.seed = seed;
            std::ostringstream cmd;
            cmd << "tailshift critvals --functional " << functional_name(f.id);
            if (f.id == FunctionalId::G) cmd << " --trim " << json(f.param).dump();
            if (f.id == FunctionalId::Htilde) cmd << " --delta " << json(f.param).dump();
            cmd << " --paths " << paths << " --steps " << steps << " --seed " << seed;
            if (!cache_dir.empty()) cmd << " --cache-dir " << cache_dir;
            fail(ErrorCategory::MissingTable, "no critical-value table " + k.key() + " in " + c.dir().string() +
                                                  "; run `" + cmd.str() + "` or pass --simulate-missing");
        }
        return *t;
    }
};

json table_json(const CriticalValueTable& t) { return json::parse(table_to_json(t)); }

json interval_json(const IntervalResult& r) {
    json j;
    j["method"] = std::string(interval_method_name(r.method));
    j["measure"] = std::string(risk_measure_name(r.measure));
    j["level"] = r.level;
    j["point"] = number(r.point);
    j["center"] = number(r.center);
    j["lo"] = number(r.lo);
    j["hi"] = number(r.hi);
    if (r.method == IntervalMethod::Sectioning) {
        j["sections"] = r.sections;
        j["section_length"] = r.section_length;
        j["dropped"] = r.dropped;
        j["section_estimates"] = r.section_estimates;
        j["dispersion"] = r.dispersion;
        j["t_quantile"] = r.t_quantile;
    } else {
        j["vn"] = r.vn;
        j["critical_value"] = r.critical_value;
        j["i_min"] = r.i_min;
        j["skipped_terms"] = r.skipped_terms;
    }
    return j;
}

json document(const std::string& command, const std::vector<std::string>& argv, json params, json result) {
    json j;
    j["schema"] = kSchema;
    j["command"] = command;
    j["provenance"] = json{{"argv", argv}, {"params", std::move(params)}};
    j["result"] = std::move(result);
    return j;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCategory::Io, "cannot write " + path);
    out << text;
    require(static_cast<bool>(out), ErrorCategory::Io, "short write to " + path);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            require(used == item.size(), ErrorCategory::InvalidInput, "bad list entry '" + item + "'");
        } catch (const std::logic_error&) {
            fail(ErrorCategory::InvalidInput, "bad list entry '" + item + "'");
        }
    }
    require(!out.empty(), ErrorCategory::InvalidInput, "empty list");
    return out;
}

struct DgpOptions {
    std::string process = "ar1";
    double phi = 0.5;
    double beta = 1.0;
    double lambda = 0.3;
    std::string innovation = "normal";
    double df = 16.5;
    std::string init;
    std::size_t burn_in = 5000;
    std::vector<std::string> regimes;

    void add(CLI::App* app) {
        app->add_option("--process", process, "ar1 or arch1")->capture_default_str();
        app->add_option("--phi", phi, "AR(1) coefficient")->capture_default_str();
        app->add_option("--arch-beta", beta, "ARCH(1) intercept")->capture_default_str();
        app->add_option("--lambda", lambda, "ARCH(1) coefficient")->capture_default_str();
        app->add_option("--innovation", innovation, "normal or t")->capture_default_str();
        app->add_option("--df", df, "t degrees of freedom")->capture_default_str();
        app->add_option("--init", init, "stationary or burn-in (default: stationary for normal AR(1))");
        app->add_option("--burn-in", burn_in, "burn-in length")->capture_default_str();
        app->add_option("--regime", regimes, "fraction:value regime switch (repeatable)");
    }

    DgpSpec spec() const {
        DgpSpec d;
        d.family = parse_dgp_family(process);
        d.phi = phi;
        d.beta = beta;
        d.lambda = lambda;
        require(innovation == "normal" || innovation == "t", ErrorCategory::InvalidInput,
                "innovation must be normal or t");
        d.innovation = innovation == "t" ? Innovation::StudentT : Innovation::Normal;
        d.df = df;
        if (init.empty()) {
            d.init = d.family == DgpFamily::AR1 && d.innovation == Innovation::Normal ? InitMode::Stationary
                                                                                       : InitMode::BurnIn;
        } else {
            require(init == "stationary" || init == "burn-in", ErrorCategory::InvalidInput,
                    "init must be stationary or burn-in");
            d.init = init == "stationary" ? InitMode::Stationary : InitMode::BurnIn;
        }
        d.burn_in = burn_in;
        for (const auto& r : regimes) {
            const auto colon = r.find(':');
            require(colon != std::string::npos, ErrorCategory::InvalidInput, "regime must be fraction:value");
            const auto v = parse_list(r.substr(0, colon) + "," + r.substr(colon + 1));
            d.regimes.push_back({v[0], v[1]});
        }
        return d;
    }
};

// Canonical trim fraction of the G table for a given data trim.
double g_trim(std::size_t n_min, std::size_t n) { return static_cast<double>(n_min) / static_cast<double>(n); }

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    CLI::App app{"Tail-risk estimation, intervals and change-point tests"};
    app.require_subcommand(1);

    // estimate
    auto* est = app.add_subcommand("estimate", "VaR, ES and CTM point estimates");
    InputOptions est_in;
    RiskOptions est_risk;
    est_in.add(est);
    est_risk.add(est, true);

    // ci
    auto* ci = app.add_subcommand("ci", "confidence interval by sectioning or self-normalization");
    InputOptions ci_in;
    RiskOptions ci_risk;
    TableOptions ci_tab;
    std::string ci_method = "selfnorm";
    std::size_t ci_m = 10;
    double ci_level = 0.95;
    std::size_t ci_imin = 0;
    ci_in.add(ci);
    ci_risk.add(ci, true);
    ci_tab.add(ci);
    ci->add_option("--method", ci_method, "sectioning or selfnorm")->capture_default_str();
    ci->add_option("--m", ci_m, "number of sections")->capture_default_str();
    ci->add_option("--level", ci_level, "coverage level")->capture_default_str();
    ci->add_option("--i-min", ci_imin, "shortest prefix in V_n (0 = ceil(1/(1-p)) + 1)");

    // test-single
    auto* ts = app.add_subcommand("test-single", "self-normalized CUSUM test for one change in ES");
    InputOptions ts_in;
    RiskOptions ts_risk;
    TableOptions ts_tab;
    double ts_level = 0.05;
    std::size_t ts_nmin = 0, ts_imin = 0;
    double ts_trim = 0.0;
    bool ts_trace = false;
    ts_in.add(ts);
    ts_risk.add(ts, false);
    ts_tab.add(ts);
    ts->add_option("--level", ts_level, "significance level")->capture_default_str();
    ts->add_option("--n-min", ts_nmin, "outer trim (0 = max(ceil(1/(1-p)) + 1, 8))");
    ts->add_option("--i-min", ts_imin, "inner trim (0 = ceil(1/(1-p)) + 1)");
    ts->add_option("--trim", ts_trim, "trim fraction of the G table (0 = n_min / n)");
    ts->add_flag("--trace", ts_trace, "include the per-candidate traces");

    // test-multiple
    auto* tm = app.add_subcommand("test-multiple", "grid test for an unknown number of ES changes");
    InputOptions tm_in;
    RiskOptions tm_risk;
    TableOptions tm_tab;
    double tm_level = 0.05;
    double tm_delta = 0.10;
    std::size_t tm_imin = 0;
    std::string tm_mode = "grid";
    bool tm_trace = false;
    tm_in.add(tm);
    tm_risk.add(tm, false);
    tm_tab.add(tm);
    tm->add_option("--level", tm_level, "significance level")->capture_default_str();
    tm->add_option("--delta", tm_delta, "trim parameter delta")->capture_default_str();
    tm->add_option("--i-min", tm_imin, "inner trim (0 = ceil(1/(1-p)) + 1)");
    tm->add_option("--mode", tm_mode, "grid (the test) or full (statistic over every pair, no decision)")
        ->capture_default_str();
    tm->add_flag("--trace", tm_trace, "include every evaluated candidate");

    // critvals
    auto* cv = app.add_subcommand("critvals", "simulate a critical-value table");
    std::string cv_fun = "g";
    double cv_trim = 0.0275, cv_delta = 0.10;
    std::string cv_norm = "data-consistent";
    std::size_t cv_paths = 10000, cv_steps = 5000;
    std::uint64_t cv_seed = 7;
    std::string cv_qs, cv_out, cv_cache;
    bool cv_stamp = false;
    unsigned cv_threads = 0;
    cv->add_option("--functional", cv_fun, "lobato, g or htilde")->capture_default_str();
    cv->add_option("--trim", cv_trim, "G trim fraction")->capture_default_str();
    cv->add_option("--delta", cv_delta, "H~ delta")->capture_default_str();
    cv->add_option("--normalization", cv_norm, "H~ normalization: data-consistent or as-printed")
        ->capture_default_str();
    cv->add_option("--paths", cv_paths, "Monte Carlo paths")->capture_default_str();
    cv->add_option("--steps", cv_steps, "steps per path")->capture_default_str();
    cv->add_option("--seed", cv_seed, "master seed")->capture_default_str();
    cv->add_option("--quantiles", cv_qs, "comma-separated levels (default 0.5,0.8,0.9,0.95,0.975,0.99)");
    cv->add_option("--out", cv_out, "table file (default: the cache entry)");
    cv->add_option("--cache-dir", cv_cache, "cache directory");
    cv->add_option("--threads", cv_threads, "worker threads (0 = all)");
    cv->add_flag("--stamp-time", cv_stamp, "record a creation time (SOURCE_DATE_EPOCH if set)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic series");
    DgpOptions sim_dgp;
    std::size_t sim_n = 1000;
    std::uint64_t sim_seed = 1, sim_stream = 0;
    double sim_shift = 0.0, sim_shift_at = 0.5;
    std::string sim_out;
    sim_dgp.add(sim);
    sim->add_option("--n", sim_n, "length")->capture_default_str();
    sim->add_option("--seed", sim_seed, "seed")->capture_default_str();
    sim->add_option("--stream", sim_stream, "substream")->capture_default_str();
    sim->add_option("--shift", sim_shift, "location shift magnitude")->capture_default_str();
    sim->add_option("--shift-at", sim_shift_at, "location shift fraction")->capture_default_str();
    sim->add_option("--out", sim_out, "CSV file (index,value)");

    // experiment
    auto* ex = app.add_subcommand("experiment", "replicate a simulation study");
    DgpOptions ex_dgp;
    TableOptions ex_tab;
    std::string ex_name = "power-location", ex_grid, ex_out;
    std::size_t ex_reps = 100, ex_first = 0, ex_n = 400, ex_m = 10;
    double ex_p = 0.9, ex_level = 0.05, ex_delta = 0.10, ex_frac = 0.5;
    std::string ex_tail = "upper";
    std::uint64_t ex_seed = 1;
    unsigned ex_threads = 0;
    ex_dgp.add(ex);
    ex_tab.add(ex);
    ex->add_option("--name", ex_name, "coverage, tstat, power-location, power-general or power-multi")
        ->capture_default_str();
    ex->add_option("--grid", ex_grid, "comma-separated grid values")->required();
    ex->add_option("--replications", ex_reps, "replications per grid point")->capture_default_str();
    ex->add_option("--first-replication", ex_first, "index of the first replication substream")
        ->capture_default_str();
    ex->add_option("--n", ex_n, "series length (power experiments)")->capture_default_str();
    ex->add_option("--p", ex_p, "probability level")->capture_default_str();
    ex->add_option("--tail", ex_tail, "upper or lower")->capture_default_str();
    ex->add_option("--level", ex_level, "significance (tests) or coverage (intervals)")->capture_default_str();
    ex->add_option("--m", ex_m, "sections")->capture_default_str();
    ex->add_option("--delta", ex_delta, "H~ delta")->capture_default_str();
    ex->add_option("--change-at", ex_frac, "change fraction")->capture_default_str();
    ex->add_option("--seed", ex_seed, "data seed")->capture_default_str();
    ex->add_option("--threads", ex_threads, "worker threads (0 = all)");
    ex->add_option("--out", ex_out, "CSV report; provenance goes to <out>.json");

    // rolling-band
    auto* rb = app.add_subcommand("rolling-band", "interval band over rolling windows");
    InputOptions rb_in;
    RiskOptions rb_risk;
    TableOptions rb_tab;
    std::size_t rb_window = 100, rb_shift = 20, rb_m = 10;
    std::string rb_method = "selfnorm", rb_out;
    double rb_level = 0.95;
    rb_in.add(rb);
    rb_risk.add(rb, false);
    rb_tab.add(rb);
    rb->add_option("--window", rb_window, "window length")->capture_default_str();
    rb->add_option("--shift", rb_shift, "distance between window starts")->capture_default_str();
    rb->add_option("--method", rb_method, "sectioning or selfnorm")->capture_default_str();
    rb->add_option("--m", rb_m, "sections")->capture_default_str();
    rb->add_option("--level", rb_level, "coverage level")->capture_default_str();
    rb->add_option("--out", rb_out, "CSV file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit(json{{"schema", kSchema}, {"error", {{"category", "invalid_input"}, {"message", e.what()}}}});
        return 2;
    }

    try {
        if (*est) {
            const TimeSeries s = est_in.load();
            const RiskSpec spec = est_risk.spec();
            const UpperTailView v = to_upper_tail(s, spec);
            const double sign = v.negated ? -1.0 : 1.0;
            const auto x = v.series.values();
            json r;
            r["n"] = s.size();
            r["effective_p"] = v.effective_p;
            r["var"] = sign * var_estimate(x, v.effective_p);
            r["es"] = sign * es_estimate(x, v.effective_p);
            if (spec.beta) r["ctm"] = sign * ctm_estimate(x, v.effective_p, *spec.beta);
            json params{{"input", est_in.describe()}, {"risk", est_risk.describe()}};
            emit(document("estimate", args, params, r));
        } else if (*ci) {
            const TimeSeries s = ci_in.load();
            const RiskSpec spec = ci_risk.spec();
            const IntervalMethod method = parse_interval_method(ci_method);
            const RiskMeasure measure = parse_risk_measure(ci_risk.measure);
            json params{{"input", ci_in.describe()}, {"risk", ci_risk.describe()}, {"method", ci_method}, {"level", ci_level}};
            IntervalResult r;
            if (method == IntervalMethod::Sectioning) {
                params["m"] = ci_m;
                r = sectioning_interval(s, spec, ci_m, ci_level, measure);
            } else {
                const auto t = ci_tab.fetch({FunctionalId::LobatoPivot, 0.0}, ci_level);
                params["table"] = t.key();
                params["i_min"] = ci_imin;
                r = selfnorm_interval(s, spec, ci_level, t, ci_imin, measure);
            }
            emit(document("ci", args, params, interval_json(r)));
        } else if (*ts) {
            const TimeSeries s = ts_in.load();
            const RiskSpec spec = ts_risk.spec();
            const double pe = spec.side == TailSide::Upper ? spec.p : 1.0 - spec.p;
            TrimPolicy trim = TrimPolicy::defaults(pe);
            if (ts_imin) trim.i_min = ts_imin;
            if (ts_nmin) trim.n_min = ts_nmin;
            trim.validate();
            const double frac = ts_trim > 0.0 ? ts_trim : g_trim(trim.n_min, s.size());
            const auto t = ts_tab.fetch({FunctionalId::G, frac}, 1.0 - ts_level);
            const TestResult res = single_test(s, spec, ts_level, trim, t);
            json params{{"input", ts_in.describe()}, {"risk", ts_risk.describe()}, {"level", ts_level},
                        {"n_min", trim.n_min}, {"i_min", trim.i_min}, {"table", res.table_key}};
            json r;
            r["statistic"] = res.statistic;
            r["critical_value"] = res.critical_value;
            r["level"] = res.level;
            r["reject"] = res.reject;
            r["location"] = *res.location;
            if (s.has_timestamps()) r["location_label"] = s.timestamps()[*res.location - 1];
            r["cusum_argmax"] = res.single->trace.cusum_argmax;
            r["n"] = res.n;
            r["effective_p"] = res.p;
            if (ts_trace) {
                json tr;
                tr["k"] = res.single->trace.k;
                tr["numerator"] = res.single->trace.numerator;
                tr["denominator"] = res.single->trace.denominator;
                json ratio = json::array();
                for (double v : res.single->trace.ratio) ratio.push_back(number(v));
                tr["ratio"] = ratio;
                r["trace"] = tr;
            }
            emit(document("test-single", args, params, r));
        } else if (*tm) {
            const TimeSeries s = tm_in.load();
            const RiskSpec spec = tm_risk.spec();
            const HnMode mode = parse_hn_mode(tm_mode);
            json params{{"input", tm_in.describe()}, {"risk", tm_risk.describe()}, {"level", tm_level},
                        {"delta", tm_delta}, {"mode", tm_mode}, {"i_min", tm_imin}};
            HnResult h;
            json r;
            if (mode == HnMode::Grid) {
                const auto t = tm_tab.fetch({FunctionalId::Htilde, tm_delta}, 1.0 - tm_level);
                const TestResult res = multiple_test(s, spec, tm_level, tm_delta, t, tm_imin, tm_trace);
                params["table"] = res.table_key;
                h = *res.multiple;
                r["statistic"] = res.statistic;
                r["critical_value"] = res.critical_value;
                r["level"] = res.level;
                r["reject"] = res.reject;
            } else {
                h = hn_statistic(s, spec, tm_delta, mode, tm_imin, tm_trace);
                r["statistic"] = h.value;
            }
            r["forward"] = {{"value", h.forward}, {"k1", h.forward_k1}, {"k2", h.forward_k2}};
            r["backward"] = {{"value", h.backward}, {"j1", h.backward_j1}, {"j2", h.backward_j2}};
            r["index_trim"] = h.index_trim;
            r["i_min"] = h.i_min;
            r["candidates"] = h.candidates;
            r["skipped"] = h.skipped;
            if (tm_trace) {
                json tr = json::array();
                for (const auto& c : h.trace) {
                    tr.push_back(json{{"direction", c.forward ? "forward" : "backward"}, {"first", c.first},
                                      {"second", c.second}, {"c", c.c}, {"d", number(c.d)}});
                }
                r["trace"] = tr;
            }
            emit(document("test-multiple", args, params, r));
        } else if (*cv) {
            FunctionalSpec f;
            f.id = parse_functional(cv_fun);
            if (f.id == FunctionalId::G) f.param = cv_trim;
            if (f.id == FunctionalId::Htilde) {
                f.param = cv_delta;
                require(cv_norm == "data-consistent" || cv_norm == "as-printed", ErrorCategory::InvalidInput,
                        "normalization must be data-consistent or as-printed");
                f.norm = cv_norm == "as-printed" ? HtildeNormalization::AsPrinted : HtildeNormalization::DataConsistent;
            }
            const std::vector<double> qs = cv_qs.empty() ? default_quantile_levels() : parse_list(cv_qs);
            CriticalValueTable t = estimate_quantiles(f, cv_paths, cv_steps, qs, cv_seed, cv_threads);
            if (cv_stamp) {
                std::time_t now = std::time(nullptr);
                if (const char* e = std::getenv("SOURCE_DATE_EPOCH")) now = static_cast<std::time_t>(std::stoll(e));
                char buf[32];
                std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
                t.created = buf;
            }
            const TableCache cache = cv_cache.empty() ? TableCache() : TableCache(cv_cache);
            const std::filesystem::path out = cv_out.empty() ? cache.path_for(t) : std::filesystem::path(cv_out);
            write_table(t, out);
            json params{{"functional", cv_fun}, {"paths", cv_paths}, {"steps", cv_steps}, {"seed", cv_seed}};
            json r{{"key", t.key()}, {"file", out.string()}, {"table", table_json(t)}};
            emit(document("critvals", args, params, r));
        } else if (*sim) {
            DgpSpec d = sim_dgp.spec();
            d.n = sim_n;
            d.seed = sim_seed;
            d.stream = sim_stream;
            TimeSeries s = generate(d);
            if (sim_shift != 0.0) s = inject_location_shift(s, sim_shift_at, sim_shift);
            if (!sim_out.empty()) {
                std::ostringstream os;
                os << "index,value\n";
                os.precision(17);
                for (std::size_t i = 0; i < s.size(); ++i) os << i + 1 << ',' << s[i] << '\n';
                write_text(sim_out, os.str());
            }
            double mean = 0.0;
            for (double v : s.values()) mean += v;
            mean /= static_cast<double>(s.size());
            json params{{"process", sim_dgp.process}, {"n", sim_n}, {"seed", sim_seed}, {"stream", sim_stream}};
            json r{{"n", s.size()}, {"mean", mean}, {"file", sim_out.empty() ? json(nullptr) : json(sim_out)}};
            if (sim_out.empty()) r["values"] = std::vector<double>(s.values().begin(), s.values().end());
            emit(document("simulate", args, params, r));
        } else if (*ex) {
            ExperimentConfig c;
            c.id = parse_experiment(ex_name);
            c.dgp = ex_dgp.spec();
            c.grid = parse_list(ex_grid);
            c.replications = ex_reps;
            c.first_replication = ex_first;
            c.n = ex_n;
            c.spec = RiskSpec(ex_p, parse_tail_side(ex_tail));
            c.level = ex_level;
            c.sections = ex_m;
            c.delta = ex_delta;
            c.change_fraction = ex_frac;
            c.seed = ex_seed;
            c.threads = ex_threads;
            ExperimentTables tables;
            const double pe = ex_tail == "upper" ? ex_p : 1.0 - ex_p;
            if (c.id == ExperimentId::Coverage) tables.lobato = ex_tab.fetch({FunctionalId::LobatoPivot, 0.0}, c.level);
            if (c.id == ExperimentId::PowerLocation || c.id == ExperimentId::PowerGeneral ||
                c.id == ExperimentId::PowerMulti) {
                tables.g = ex_tab.fetch({FunctionalId::G, g_trim(TrimPolicy::defaults(pe).n_min, c.n)}, 1.0 - c.level);
            }
            if (c.id == ExperimentId::PowerMulti) tables.htilde = ex_tab.fetch({FunctionalId::Htilde, c.delta}, 1.0 - c.level);
            const ExperimentReport rep = run_experiment(c, tables);
            if (!ex_out.empty()) {
                write_text(ex_out, rep.to_csv());
                write_text(ex_out + ".json", rep.provenance_json());
            }
            json rows = json::array();
            for (const auto& row : rep.rows) {
                rows.push_back(json{{"grid", row.grid}, {"metric", row.metric}, {"value", number(row.value)},
                                    {"std_error", number(row.std_error)}, {"replications", row.replications},
                                    {"degenerate", row.degenerate}});
            }
            json params = json::parse(rep.provenance_json());
            params.erase("seconds");
            emit(document("experiment", args, params, json{{"rows", rows}}));
        } else if (*rb) {
            const TimeSeries s = rb_in.load();
            const RiskSpec spec = rb_risk.spec();
            const IntervalMethod method = parse_interval_method(rb_method);
            json params{{"input", rb_in.describe()}, {"risk", rb_risk.describe()}, {"window", rb_window},
                        {"shift", rb_shift}, {"method", rb_method}, {"level", rb_level}};
            std::optional<CriticalValueTable> t;
            if (method == IntervalMethod::SelfNorm) {
                t = rb_tab.fetch({FunctionalId::LobatoPivot, 0.0}, rb_level);
                params["table"] = t->key();
            } else {
                params["m"] = rb_m;
            }
            const RollingBandResult band =
                rolling_band(s, spec, rb_window, rb_shift, method, rb_level, t ? &*t : nullptr, rb_m);
            json rows = json::array();
            std::ostringstream csv;
            csv.precision(17);
            csv << "first,last,first_label,last_label,point,lo,hi,degenerate\n";
            for (const auto& row : band.rows) {
                rows.push_back(json{{"first", row.first}, {"last", row.last}, {"first_label", row.first_label},
                                    {"last_label", row.last_label}, {"point", row.point}, {"lo", row.lo},
                                    {"hi", row.hi}, {"degenerate", row.degenerate}});
                csv << row.first << ',' << row.last << ',' << row.first_label << ',' << row.last_label << ','
                    << row.point << ',' << row.lo << ',' << row.hi << ',' << (row.degenerate ? 1 : 0) << '\n';
            }
            if (!rb_out.empty()) write_text(rb_out, csv.str());
            emit(document("rolling-band", args, params, json{{"windows", rows}}));
        }
    } catch (const DegenerateError& e) {
        emit(json{{"schema", kSchema},
                  {"error", {{"category", "degenerate"}, {"message", e.what()}, {"center", number(e.center())}}}});
        return exit_code(ErrorCategory::Degenerate);
    } catch (const Error& e) {
        emit(json{{"schema", kSchema},
                  {"error", {{"category", std::string(category_name(e.category()))}, {"message", e.what()}}}});
        return exit_code(e.category());
    } catch (const std::exception& e) {
        emit(json{{"schema", kSchema}, {"error", {{"category", "io"}, {"message", e.what()}}}});
        return 1;
    }
    return 0;
}
