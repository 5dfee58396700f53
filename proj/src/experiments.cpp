#include "tailshift/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "tailshift/changepoint.hpp"
#include "tailshift/error.hpp"
#include "tailshift/intervals.hpp"
#include "tailshift/parallel.hpp"
#include "tailshift/tdist.hpp"

namespace tailshift {

namespace {

constexpr std::uint32_t kDataPurpose = 16;

double upper_level(const RiskSpec& s) { return s.side == TailSide::Upper ? s.p : 1.0 - s.p; }

// Outcome slots of one replication at one grid point.
struct Outcome {
    std::vector<double> values;
    std::vector<bool> degenerate;
};

std::size_t as_count(double v, const char* what) {
    require(v >= 1.0 && v == std::floor(v), ErrorCategory::InvalidInput, std::string(what) + " must be a positive integer");
    return static_cast<std::size_t>(v);
}

DgpSpec replicate(const ExperimentConfig& c, std::size_t n, std::size_t r) {
    DgpSpec d = c.dgp;
    d.n = n;
    d.seed = c.seed;
    d.stream = substream_id(kDataPurpose, c.first_replication + r);
    return d;
}

// Runs `metrics` outcome slots per replication and summarises each slot as a
// rate (values in {0,1}) or a mean.
void summarise(ExperimentReport& rep, double grid, const std::vector<std::string>& metrics,
               const std::vector<bool>& is_rate, const std::vector<Outcome>& out) {
    for (std::size_t s = 0; s < metrics.size(); ++s) {
        double sum = 0.0, sum2 = 0.0;
        std::size_t valid = 0, degenerate = 0;
        for (const auto& o : out) {
            if (o.degenerate[s]) {
                ++degenerate;
                continue;
            }
            sum += o.values[s];
            sum2 += o.values[s] * o.values[s];
            ++valid;
        }
        ReportRow row;
        row.grid = grid;
        row.metric = metrics[s];
        row.replications = valid;
        row.degenerate = degenerate;
        if (valid > 0) {
            const double nv = static_cast<double>(valid);
            row.value = sum / nv;
            if (is_rate[s]) {
                row.std_error = std::sqrt(row.value * (1.0 - row.value) / nv);
            } else if (valid > 1) {
                const double var = std::max(0.0, (sum2 - nv * row.value * row.value) / (nv - 1.0));
                row.std_error = std::sqrt(var / nv);
            }
        } else {
            row.value = std::nan("");
        }
        rep.rows.push_back(row);
    }
}

template <class Body>
std::vector<Outcome> replicate_all(const ExperimentConfig& c, std::size_t slots, Body body) {
    std::vector<Outcome> out(c.replications);
    parallel_for(c.replications, c.threads, [&](std::size_t r) {
        Outcome o{std::vector<double>(slots, 0.0), std::vector<bool>(slots, false)};
        body(r, o);
        out[r] = std::move(o);
    });
    return out;
}

const CriticalValueTable& need(const std::optional<CriticalValueTable>& t, const char* name) {
    if (!t) fail(ErrorCategory::MissingTable, std::string("experiment needs a ") + name + " critical-value table");
    return *t;
}

template <class F>
void guarded(Outcome& o, std::size_t slot, F f) {
    try {
        o.values[slot] = f();
    } catch (const DegenerateError&) {
        o.degenerate[slot] = true;
    }
}

ExperimentReport start(const ExperimentConfig& c) {
    c.validate();
    ExperimentReport rep;
    rep.config = c;
    return rep;
}

void finish(ExperimentReport& rep, std::chrono::steady_clock::time_point t0) {
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string experiment_name(ExperimentId id) {
    switch (id) {
        case ExperimentId::Coverage: return "coverage";
        case ExperimentId::TStatHist: return "tstat";
        case ExperimentId::PowerLocation: return "power-location";
        case ExperimentId::PowerGeneral: return "power-general";
        case ExperimentId::PowerMulti: return "power-multi";
    }
    return "unknown";
}

ExperimentId parse_experiment(const std::string& s) {
    for (auto id : {ExperimentId::Coverage, ExperimentId::TStatHist, ExperimentId::PowerLocation,
                    ExperimentId::PowerGeneral, ExperimentId::PowerMulti}) {
        if (experiment_name(id) == s) return id;
    }
    fail(ErrorCategory::InvalidInput,
         "unknown experiment '" + s + "' (expected coverage, tstat, power-location, power-general or power-multi)");
}

void ExperimentConfig::validate() const {
    require(replications >= 1, ErrorCategory::InvalidInput, "replications must be at least 1");
    require(!grid.empty(), ErrorCategory::InvalidInput, "the experiment grid is empty");
    require(level > 0.0 && level < 1.0, ErrorCategory::InvalidInput, "level must lie in (0,1)");
    require(change_fraction > 0.0 && change_fraction < 1.0, ErrorCategory::InvalidInput,
            "change fraction must lie in (0,1)");
}

const ReportRow* ExperimentReport::find(double grid, const std::string& metric) const {
    for (const auto& r : rows) {
        if (r.metric == metric && std::abs(r.grid - grid) <= 1e-12 * std::max(1.0, std::abs(grid))) return &r;
    }
    return nullptr;
}

std::string ExperimentReport::to_csv() const {
    std::ostringstream os;
    os << "grid,metric,value,std_error,replications,degenerate\n";
    for (const auto& r : rows) {
        os << format_double(r.grid) << ',' << r.metric << ',' << format_double(r.value) << ','
           << format_double(r.std_error) << ',' << r.replications << ',' << r.degenerate << '\n';
    }
    return os.str();
}

std::string ExperimentReport::provenance_json() const {
    using json = nlohmann::ordered_json;
    const auto& c = config;
    json d;
    d["family"] = dgp_family_name(c.dgp.family);
    d["phi"] = c.dgp.phi;
    d["beta"] = c.dgp.beta;
    d["lambda"] = c.dgp.lambda;
    d["innovation"] = c.dgp.innovation == Innovation::Normal ? "normal" : "t";
    d["df"] = c.dgp.df;
    d["init"] = c.dgp.init == InitMode::Stationary ? "stationary" : "burn-in";
    d["burn_in"] = c.dgp.burn_in;
    json j;
    j["schema"] = "tailshift.experiment/1";
    j["experiment"] = experiment_name(c.id);
    j["dgp"] = d;
    j["grid"] = c.grid;
    j["replications"] = c.replications;
    j["first_replication"] = c.first_replication;
    j["n"] = c.n;
    j["p"] = c.spec.p;
    j["tail"] = std::string(tail_side_name(c.spec.side));
    j["level"] = c.level;
    j["sections"] = c.sections;
    j["delta"] = c.delta;
    j["change_fraction"] = c.change_fraction;
    j["seed"] = c.seed;
    j["tables"] = tables;
    j["seconds"] = seconds;
    return j.dump(2) + "\n";
}

double ar1_true_es(double phi, const RiskSpec& spec) {
    require(std::abs(phi) < 1.0, ErrorCategory::InvalidInput, "AR(1) needs |phi| < 1");
    const double p = spec.side == TailSide::Upper ? spec.p : 1.0 - spec.p;
    const double sigma = 1.0 / std::sqrt(1.0 - phi * phi);
    const double es = sigma * normal_pdf(normal_quantile(p)) / (1.0 - p);
    return spec.side == TailSide::Upper ? es : -es;
}

ExperimentReport run_coverage(const ExperimentConfig& c, const ExperimentTables& tables) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep = start(c);
    require(c.dgp.family == DgpFamily::AR1 && c.dgp.innovation == Innovation::Normal, ErrorCategory::InvalidInput,
            "coverage needs the normal AR(1), whose ES is known in closed form");
    const CriticalValueTable& lob = need(tables.lobato, "lobato");
    rep.tables.push_back(lob.key());
    const double truth = ar1_true_es(c.dgp.phi, c.spec);
    for (double g : c.grid) {
        const std::size_t n = as_count(g, "sample size");
        const auto out = replicate_all(c, 4, [&](std::size_t r, Outcome& o) {
            const TimeSeries x = generate(replicate(c, n, r));
            IntervalResult a, b;
            guarded(o, 0, [&] {
                a = sectioning_interval(x, c.spec, c.sections, c.level);
                return static_cast<double>(a.lo <= truth && truth <= a.hi);
            });
            o.values[1] = o.degenerate[0] ? 0.0 : a.hi - a.lo;
            o.degenerate[1] = o.degenerate[0];
            guarded(o, 2, [&] {
                b = selfnorm_interval(x, c.spec, c.level, lob);
                return static_cast<double>(b.lo <= truth && truth <= b.hi);
            });
            o.values[3] = o.degenerate[2] ? 0.0 : b.hi - b.lo;
            o.degenerate[3] = o.degenerate[2];
        });
        summarise(rep, g, {"coverage_sectioning", "width_sectioning", "coverage_selfnorm", "width_selfnorm"},
                  {true, false, true, false}, out);
    }
    finish(rep, t0);
    return rep;
}

ExperimentReport run_tstat_hist(const ExperimentConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep = start(c);
    require(c.dgp.family == DgpFamily::AR1 && c.dgp.innovation == Innovation::Normal, ErrorCategory::InvalidInput,
            "the pivot study needs the normal AR(1), whose ES is known in closed form");
    const double truth = ar1_true_es(c.dgp.phi, c.spec);
    for (double g : c.grid) {
        const std::size_t n = as_count(g, "sample size");
        const auto out = replicate_all(c, 1, [&](std::size_t r, Outcome& o) {
            const TimeSeries x = generate(replicate(c, n, r));
            guarded(o, 0, [&] { return sectioning_interval(x, c.spec, c.sections, c.level).t_statistic(truth); });
        });
        std::vector<double> stats;
        std::size_t degenerate = 0;
        for (const auto& o : out) {
            if (o.degenerate[0]) {
                ++degenerate;
            } else {
                stats.push_back(o.values[0]);
            }
        }
        summarise(rep, g, {"mean_tstat"}, {false}, out);
        ReportRow ks;
        ks.grid = g;
        ks.metric = "ks_distance";
        ks.value = stats.empty() ? std::nan("") : ks_distance_to_t(stats, static_cast<double>(c.sections - 1));
        ks.replications = stats.size();
        ks.degenerate = degenerate;
        rep.rows.push_back(ks);
        rep.samples.insert(rep.samples.end(), stats.begin(), stats.end());
    }
    finish(rep, t0);
    return rep;
}

ExperimentReport run_power_location(const ExperimentConfig& c, const ExperimentTables& tables) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep = start(c);
    const CriticalValueTable& g = need(tables.g, "g");
    rep.tables.push_back(g.key());
    const TrimPolicy trim = TrimPolicy::defaults(upper_level(c.spec));
    for (double shift : c.grid) {
        const auto out = replicate_all(c, 1, [&](std::size_t r, Outcome& o) {
            const TimeSeries x = inject_location_shift(generate(replicate(c, c.n, r)), c.change_fraction, shift);
            guarded(o, 0, [&] { return static_cast<double>(single_test(x, c.spec, c.level, trim, g).reject); });
        });
        summarise(rep, shift, {"reject_single"}, {true}, out);
    }
    finish(rep, t0);
    return rep;
}

ExperimentReport run_power_general(const ExperimentConfig& c, const ExperimentTables& tables) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep = start(c);
    const CriticalValueTable& g = need(tables.g, "g");
    rep.tables.push_back(g.key());
    const TrimPolicy trim = TrimPolicy::defaults(upper_level(c.spec));
    for (double v : c.grid) {
        ExperimentConfig cc = c;
        if (cc.dgp.family == DgpFamily::AR1) {
            cc.dgp.innovation = Innovation::StudentT;
            cc.dgp.init = InitMode::BurnIn;
        }
        cc.dgp.regimes = {{c.change_fraction, v}};
        const auto out = replicate_all(cc, 1, [&](std::size_t r, Outcome& o) {
            const TimeSeries x = generate(replicate(cc, cc.n, r));
            guarded(o, 0, [&] { return static_cast<double>(single_test(x, c.spec, c.level, trim, g).reject); });
        });
        summarise(rep, v, {"reject_single"}, {true}, out);
    }
    finish(rep, t0);
    return rep;
}

ExperimentReport run_power_multi(const ExperimentConfig& c, const ExperimentTables& tables) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep = start(c);
    const CriticalValueTable& g = need(tables.g, "g");
    const CriticalValueTable& h = need(tables.htilde, "htilde");
    rep.tables.push_back(g.key());
    rep.tables.push_back(h.key());
    const TrimPolicy trim = TrimPolicy::defaults(upper_level(c.spec));
    for (double v : c.grid) {
        ExperimentConfig cc = c;
        cc.dgp.family = DgpFamily::AR1;
        cc.dgp.innovation = Innovation::StudentT;
        cc.dgp.init = InitMode::BurnIn;
        cc.dgp.regimes = {{1.0 / 3.0, v}, {2.0 / 3.0, c.dgp.df}};
        const auto out = replicate_all(cc, 2, [&](std::size_t r, Outcome& o) {
            const TimeSeries x = generate(replicate(cc, cc.n, r));
            guarded(o, 0, [&] { return static_cast<double>(single_test(x, c.spec, c.level, trim, g).reject); });
            guarded(o, 1, [&] { return static_cast<double>(multiple_test(x, c.spec, c.level, c.delta, h).reject); });
        });
        summarise(rep, v, {"reject_single", "reject_multiple"}, {true, true}, out);
    }
    finish(rep, t0);
    return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const ExperimentTables& tables) {
    switch (config.id) {
        case ExperimentId::Coverage: return run_coverage(config, tables);
        case ExperimentId::TStatHist: return run_tstat_hist(config);
        case ExperimentId::PowerLocation: return run_power_location(config, tables);
        case ExperimentId::PowerGeneral: return run_power_general(config, tables);
        case ExperimentId::PowerMulti: return run_power_multi(config, tables);
    }
    fail(ErrorCategory::InvalidInput, "unknown experiment");
}

}  // namespace tailshift
