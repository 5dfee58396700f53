#include "tailshift/dgp.hpp"

#include <cmath>

#include "tailshift/error.hpp"

namespace tailshift {

namespace {

std::size_t floor_index(double fraction, std::size_t n) {
    const double x = fraction * static_cast<double>(n);
    return static_cast<std::size_t>(std::floor(x + 1e-9 * std::max(1.0, x)));
}

// Parameter in force for innovation eps_i, i = 1..n-1 (burn-in uses i = 0).
class Schedule {
public:
    Schedule(const DgpSpec& spec, double base) : base_(base) {
        for (const auto& r : spec.regimes) switches_.emplace_back(floor_index(r.fraction, spec.n), r.value);
    }
    double at(std::size_t i) const {
        double v = base_;
        for (const auto& [at, value] : switches_) {
            if (i > at) v = value;
        }
        return v;
    }

private:
    double base_;
    std::vector<std::pair<std::size_t, double>> switches_;
};

double draw(Innovation kind, double df, RandomStream& rng) {
    return kind == Innovation::Normal ? rng.normal() : rng.student_t(df);
}

}  // namespace

void DgpSpec::validate() const {
    require(n >= 1, ErrorCategory::InvalidInput, "generated length must be at least 1");
    if (family == DgpFamily::AR1) {
        require(std::abs(phi) < 1.0, ErrorCategory::InvalidInput, "AR(1) needs |phi| < 1");
    } else {
        require(beta > 0.0, ErrorCategory::InvalidInput, "ARCH(1) needs beta > 0");
        require(lambda >= 0.0, ErrorCategory::InvalidInput, "ARCH(1) needs lambda >= 0");
    }
    if (innovation == Innovation::StudentT) {
        require(df > 0.0, ErrorCategory::InvalidInput, "t innovations need positive degrees of freedom");
    }
    double last = 0.0;
    for (const auto& r : regimes) {
        require(r.fraction > last && r.fraction < 1.0, ErrorCategory::InvalidInput,
                "regime change fractions must be strictly increasing in (0,1)");
        last = r.fraction;
        if (family == DgpFamily::AR1) {
            require(innovation == Innovation::StudentT && r.value > 0.0, ErrorCategory::InvalidInput,
                    "AR(1) regimes switch the degrees of freedom of t innovations");
        } else {
            require(r.value >= 0.0, ErrorCategory::InvalidInput, "ARCH(1) regimes need lambda >= 0");
        }
    }
}

DgpSpec DgpSpec::ar1(double phi, std::size_t n, std::uint64_t seed) {
    DgpSpec s;
    s.family = DgpFamily::AR1;
    s.phi = phi;
    s.n = n;
    s.seed = seed;
    return s;
}

DgpSpec DgpSpec::arch1(double beta, double lambda, std::size_t n, std::uint64_t seed) {
    DgpSpec s;
    s.family = DgpFamily::ARCH1;
    s.beta = beta;
    s.lambda = lambda;
    s.init = InitMode::BurnIn;
    s.n = n;
    s.seed = seed;
    return s;
}

DgpSpec DgpSpec::three_regime_ar1(double v, std::size_t n, std::uint64_t seed) {
    DgpSpec s = ar1(0.5, n, seed);
    s.innovation = Innovation::StudentT;
    s.df = 16.5;
    s.init = InitMode::BurnIn;
    s.regimes = {{1.0 / 3.0, v}, {2.0 / 3.0, 16.5}};
    return s;
}

TimeSeries gen_ar1(const DgpSpec& spec) {
    spec.validate();
    require(spec.family == DgpFamily::AR1, ErrorCategory::InvalidInput, "gen_ar1 needs an AR(1) spec");
    RandomStream rng(spec.seed, spec.stream);
    const Schedule df(spec, spec.df);
    std::vector<double> x(spec.n);
    if (spec.init == InitMode::Stationary) {
        require(spec.innovation == Innovation::Normal, ErrorCategory::InvalidInput,
                "stationary initialisation has no closed form for t innovations; use a burn-in");
        x[0] = rng.normal() / std::sqrt(1.0 - spec.phi * spec.phi);
    } else {
        double v = 0.0;
        for (std::size_t b = 0; b < spec.burn_in; ++b) v = spec.phi * v + draw(spec.innovation, spec.df, rng);
        x[0] = v;
    }
    for (std::size_t i = 1; i < spec.n; ++i) {
        x[i] = spec.phi * x[i - 1] + draw(spec.innovation, df.at(i), rng);
    }
    return TimeSeries(std::move(x));
}

TimeSeries gen_arch1(const DgpSpec& spec) {
    spec.validate();
    require(spec.family == DgpFamily::ARCH1, ErrorCategory::InvalidInput, "gen_arch1 needs an ARCH(1) spec");
    RandomStream rng(spec.seed, spec.stream);
    const Schedule lambda(spec, spec.lambda);
    std::vector<double> x(spec.n);
    double v = 0.0;
    if (spec.init == InitMode::BurnIn) {
        for (std::size_t b = 0; b < spec.burn_in; ++b) {
            v = std::sqrt(spec.beta + spec.lambda * v * v) * draw(spec.innovation, spec.df, rng);
        }
        x[0] = v;
    } else {
        // No closed-form stationary law; start from the conditional law given X_0 = 0.
        x[0] = std::sqrt(spec.beta) * draw(spec.innovation, spec.df, rng);
    }
    for (std::size_t i = 1; i < spec.n; ++i) {
        x[i] = std::sqrt(spec.beta + lambda.at(i) * x[i - 1] * x[i - 1]) * draw(spec.innovation, spec.df, rng);
    }
    return TimeSeries(std::move(x));
}

TimeSeries generate(const DgpSpec& spec) {
    return spec.family == DgpFamily::AR1 ? gen_ar1(spec) : gen_arch1(spec);
}

TimeSeries inject_location_shift(const TimeSeries& series, double at_fraction, double magnitude) {
    require(at_fraction > 0.0 && at_fraction < 1.0, ErrorCategory::InvalidInput, "shift fraction must lie in (0,1)");
    const std::size_t cut = floor_index(at_fraction, series.size());
    std::vector<double> v(series.values().begin(), series.values().end());
    for (std::size_t i = cut; i < v.size(); ++i) v[i] += magnitude;
    if (series.has_timestamps()) return TimeSeries(std::move(v), series.timestamps());
    return TimeSeries(std::move(v));
}

double sample_normal(RandomStream& rng) { return rng.normal(); }

double sample_student_t(double v, RandomStream& rng) {
    require(v > 0.0, ErrorCategory::InvalidInput, "t degrees of freedom must be positive");
    return rng.student_t(v);
}

std::string dgp_family_name(DgpFamily f) { return f == DgpFamily::AR1 ? "ar1" : "arch1"; }

DgpFamily parse_dgp_family(const std::string& s) {
    if (s == "ar1") return DgpFamily::AR1;
    if (s == "arch1") return DgpFamily::ARCH1;
    fail(ErrorCategory::InvalidInput, "unknown process '" + s + "' (expected ar1 or arch1)");
}

}  // namespace tailshift
