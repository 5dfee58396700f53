#pragma once

// Replication harness for the simulation studies: interval coverage, the
// sectioning pivot's distribution, and rejection rates of the change-point
// tests over a swept parameter.
//
// Replication r draws its data from substream r of the configured seed for
// every grid point, so grid points share random numbers and a report is a
// deterministic function of (config, seed) whatever the thread count.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tailshift/dgp.hpp"
#include "tailshift/estimators.hpp"
#include "tailshift/limitsim.hpp"
#include "tailshift/series.hpp"

namespace tailshift {

enum class ExperimentId { Coverage, TStatHist, PowerLocation, PowerGeneral, PowerMulti };

std::string experiment_name(ExperimentId id);
ExperimentId parse_experiment(const std::string& s);

struct ExperimentConfig {
    ExperimentId id = ExperimentId::Coverage;
    DgpSpec dgp;                 // template; n and stream are set per run
    std::vector<double> grid;    // n (coverage, tstat), shift, df or lambda', df (multi)
    std::size_t replications = 100;
    std::size_t first_replication = 0;
    std::size_t n = 400;         // ignored by coverage/tstat, where the grid holds n
    RiskSpec spec{0.95};
    double level = 0.05;         // significance for tests, coverage for intervals
    std::size_t sections = 10;
    double delta = 0.10;
    double change_fraction = 0.5;
    std::uint64_t seed = 1;
    unsigned threads = 0;

    void validate() const;
};

// Critical values the runs need: G for the single test, H~ for the multiple
// test, the pivot for self-normalized intervals.
struct ExperimentTables {
    std::optional<CriticalValueTable> g;
    std::optional<CriticalValueTable> htilde;
    std::optional<CriticalValueTable> lobato;
};

struct ReportRow {
    double grid = 0.0;
    std::string metric;
    double value = 0.0;
    double std_error = 0.0;      // sqrt(r (1 - r) / R) for rates, s / sqrt(R) for means
    std::size_t replications = 0;
    std::size_t degenerate = 0;  // replications with a vanishing self-normalizer
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ReportRow> rows;
    std::vector<std::string> tables;   // keys of the critical-value tables used
    std::vector<double> samples;       // raw pivots (tstat experiment)
    double seconds = 0.0;

    const ReportRow* find(double grid, const std::string& metric) const;
    std::string to_csv() const;
    std::string provenance_json() const;
};

// ES of the stationary AR(1) with normal innovations: sigma phi(z_p) / (1 - p)
// with sigma^2 = 1 / (1 - phi^2); the lower tail is handled by symmetry.
double ar1_true_es(double phi, const RiskSpec& spec);

ExperimentReport run_coverage(const ExperimentConfig& config, const ExperimentTables& tables);
ExperimentReport run_tstat_hist(const ExperimentConfig& config);
ExperimentReport run_power_location(const ExperimentConfig& config, const ExperimentTables& tables);
ExperimentReport run_power_general(const ExperimentConfig& config, const ExperimentTables& tables);
ExperimentReport run_power_multi(const ExperimentConfig& config, const ExperimentTables& tables);
ExperimentReport run_experiment(const ExperimentConfig& config, const ExperimentTables& tables);

}  // namespace tailshift
