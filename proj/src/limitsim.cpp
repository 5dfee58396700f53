#include "tailshift/limitsim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tailshift/error.hpp"
#include "tailshift/parallel.hpp"

namespace tailshift {

namespace {

constexpr double kIndexGuard = 1e-9;

// A path whose bridge W(t) - t W(1) vanishes (up to rounding) has no
// self-normalizer; every functional here is undefined on it.
void check_nondegenerate(const BrownianPath& path) {
    const auto w = path.values();
    const std::size_t n = path.steps();
    const double w1 = w[n];
    double energy = 0.0;
    double mass = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double b = w[k] - (static_cast<double>(k) / static_cast<double>(n)) * w1;
        energy += b * b;
        mass += w[k] * w[k];
    }
    if (!(energy > 1e-20 * mass) || mass == 0.0) {
        throw DegenerateError("degenerate path: Brownian bridge vanishes identically", 0.0);
    }
}

}  // namespace

BrownianPath::BrownianPath(std::vector<double> w) : w_(std::move(w)) {
    const std::size_t n1 = w_.size();
    s1_.assign(n1, 0.0);
    s2_.assign(n1, 0.0);
    sj_.assign(n1, 0.0);
    for (std::size_t k = 1; k < n1; ++k) {
        const double prev = w_[k - 1];
        s1_[k] = s1_[k - 1] + prev;
        s2_[k] = s2_[k - 1] + prev * prev;
        sj_[k] = sj_[k - 1] + static_cast<double>(k - 1) * prev;
    }
}

BrownianPath BrownianPath::from_increments(std::span<const double> z) {
    require(z.size() >= 10, ErrorCategory::InvalidInput, "Brownian path needs at least 10 steps");
    const double scale = 1.0 / std::sqrt(static_cast<double>(z.size()));
    std::vector<double> w(z.size() + 1, 0.0);
    double acc = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
        acc += z[j];
        w[j + 1] = scale * acc;
    }
    return BrownianPath(std::move(w));
}

BrownianPath BrownianPath::time_reversed() const {
    const std::size_t n = steps();
    std::vector<double> w(n + 1);
    for (std::size_t k = 0; k <= n; ++k) w[k] = w_[n] - w_[n - k];
    BrownianPath p(std::move(w));
    p.seed = seed;
    p.stream = stream;
    return p;
}

BrownianPath BrownianPath::scaled(double factor) const {
    std::vector<double> w(w_);
    for (double& x : w) x *= factor;
    BrownianPath p(std::move(w));
    p.seed = seed;
    p.stream = stream;
    return p;
}

BrownianPath simulate_path(std::size_t steps, RandomStream& rng) {
    std::vector<double> z(steps);
    for (double& v : z) v = rng.normal();
    BrownianPath p = BrownianPath::from_increments(z);
    p.seed = rng.seed();
    p.stream = rng.stream();
    return p;
}

double lobato_pivot(const BrownianPath& path) {
    const auto w = path.values();
    const std::size_t n = path.steps();
    const double w1 = w[n];
    double energy = 0.0;
    double mass = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double b = w[k] - (static_cast<double>(k) / static_cast<double>(n)) * w1;
        energy += b * b;
        mass += w[k] * w[k];
    }
    mass += w1 * w1;
    if (!(energy > 1e-20 * mass) || mass == 0.0) {
        throw DegenerateError("degenerate path: Brownian bridge vanishes identically", 0.0);
    }
    return std::abs(w1) / std::sqrt(energy / static_cast<double>(n));
}

std::size_t ceil_index(double x) {
    return static_cast<std::size_t>(std::ceil(x - kIndexGuard * std::max(1.0, std::abs(x))));
}

std::size_t grid_index(double g, std::size_t n) {
    const double x = g * static_cast<double>(n);
    return static_cast<std::size_t>(std::floor(x + kIndexGuard * std::max(1.0, x)));
}

std::size_t delta_index_trim(double delta, std::size_t n) {
    return std::max<std::size_t>(1, ceil_index(delta * static_cast<double>(n)));
}

double g_functional(const BrownianPath& path, double trim_fraction) {
    require(trim_fraction > 0.0 && trim_fraction < 0.5, ErrorCategory::InvalidInput,
            "trim fraction must lie in (0, 0.5)");
    check_nondegenerate(path);
    const std::size_t n = path.steps();
    const std::size_t lo = std::max<std::size_t>(1, ceil_index(trim_fraction * static_cast<double>(n)));
    const std::size_t hi = n - lo;
    require(lo <= hi, ErrorCategory::TooShort, "trim leaves no candidate split");
    const double r = kernels::max_split_ratio(path.moments(), 0, n, lo, hi, static_cast<double>(n));
    if (r < 0.0) throw DegenerateError("degenerate path: every self-normalizer is zero", 0.0);
    return r;
}

std::vector<double> coarse_grid(double delta) {
    require(delta > 0.0 && delta < 0.5, ErrorCategory::InvalidInput, "delta must lie in (0, 0.5)");
    std::vector<double> g;
    const double half = 0.5 * delta;
    const long kmax = static_cast<long>(std::floor(0.5 / half + 1e-9));
    for (long k = -kmax; k <= kmax; ++k) {
        const double v = 0.5 + static_cast<double>(k) * half;
        if (v >= delta - 1e-12 && v <= 1.0 - delta + 1e-12) g.push_back(v);
    }
    return g;
}

HtildeValue htilde_functional(const BrownianPath& path, double delta, HtildeNormalization norm) {
    check_nondegenerate(path);
    const std::size_t n = path.steps();
    const std::size_t m = delta_index_trim(delta, n);
    const auto mom = path.moments();
    const auto grid = coarse_grid(delta);

    HtildeValue out{-1.0, -1.0};
    for (const double g : grid) {
        const std::size_t k2 = grid_index(g, n);
        // Forward: r1 = 0, r2 = k1/N, r3 = K2/N.
        if (k2 >= 2 * m && k2 + m <= n) {
            const double scale = norm == HtildeNormalization::AsPrinted ? static_cast<double>(n)
                                                                        : static_cast<double>(k2);
            out.forward = std::max(out.forward, kernels::max_split_ratio(mom, 0, k2, m, k2 - m, scale));
        }
        // Backward: r1 = J1/N, r2 = k/N, r3 = 1.
        const std::size_t j1 = k2;
        if (j1 >= m && j1 + 2 * m <= n) {
            const double scale = norm == HtildeNormalization::AsPrinted ? static_cast<double>(n)
                                                                        : static_cast<double>(n - j1);
            out.backward = std::max(out.backward, kernels::max_split_ratio(mom, j1, n, j1 + m, n - m, scale));
        }
    }
    require(out.forward >= 0.0 && out.backward >= 0.0, ErrorCategory::TooShort,
            "delta leaves no admissible (s, t) pair on the grid");
    return out;
}

std::string functional_name(FunctionalId id) {
    switch (id) {
        case FunctionalId::LobatoPivot: return "lobato";
        case FunctionalId::G: return "g";
        case FunctionalId::Htilde: return "htilde";
    }
    return "unknown";
}

FunctionalId parse_functional(const std::string& s) {
    if (s == "lobato") return FunctionalId::LobatoPivot;
    if (s == "g") return FunctionalId::G;
    if (s == "htilde") return FunctionalId::Htilde;
    fail(ErrorCategory::InvalidInput, "unknown functional '" + s + "' (expected lobato, g or htilde)");
}

double FunctionalSpec::evaluate(const BrownianPath& path) const {
    switch (id) {
        case FunctionalId::LobatoPivot: return lobato_pivot(path);
        case FunctionalId::G: return g_functional(path, param);
        case FunctionalId::Htilde: return htilde_functional(path, param, norm).total();
    }
    return 0.0;
}

double CriticalValueTable::quantile(double q) const {
    for (const auto& [level, value] : quantiles) {
        if (std::abs(level - q) <= 1e-12) return value;
    }
    std::ostringstream os;
    os << "critical-value table " << key() << " has no quantile " << q;
    fail(ErrorCategory::MissingTable, os.str());
}

namespace {

std::string shortest(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    // Prefer the shortest representation that round-trips.
    for (int p = 1; p <= 17; ++p) {
        std::ostringstream t;
        t.precision(p);
        t << v;
        if (std::stod(t.str()) == v) return t.str();
    }
    return os.str();
}

}  // namespace

std::string CriticalValueTable::key() const {
    std::ostringstream os;
    os << functional_name(functional.id);
    if (functional.id == FunctionalId::G) os << "_trim" << shortest(functional.param);
    if (functional.id == FunctionalId::Htilde) {
        os << "_delta" << shortest(functional.param);
        if (functional.norm == HtildeNormalization::AsPrinted) os << "_printed";
    }
    os << "_N" << steps << "_M" << paths << "_seed" << seed;
    return os.str();
}

std::vector<double> default_quantile_levels() { return {0.5, 0.8, 0.9, 0.95, 0.975, 0.99}; }

double order_statistic_quantile(std::span<const double> sorted, double q) {
    require(!sorted.empty(), ErrorCategory::InvalidInput, "quantile of an empty sample");
    require(q > 0.0 && q < 1.0, ErrorCategory::InvalidInput, "quantile level must lie in (0,1)");
    const double x = q * static_cast<double>(sorted.size());
    std::size_t rank = static_cast<std::size_t>(std::ceil(x - 1e-12 * std::max(1.0, x)));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

std::vector<double> simulate_functional(const std::function<double(const BrownianPath&)>& f,
                                        std::size_t paths, std::size_t steps, std::uint64_t seed,
                                        std::uint32_t purpose, unsigned threads) {
    std::vector<double> values(paths);
    parallel_for(paths, threads, [&](std::size_t i) {
        RandomStream rng(seed, substream_id(purpose, i));
        const BrownianPath path = simulate_path(steps, rng);
        values[i] = f(path);
    });
    return values;
}

CriticalValueTable estimate_quantiles_with(const FunctionalSpec& label,
                                           const std::function<double(const BrownianPath&)>& f,
                                           std::size_t paths, std::size_t steps,
                                           std::span<const double> qs, std::uint64_t seed,
                                           unsigned threads) {
    require(paths >= 100, ErrorCategory::InvalidInput, "at least 100 paths are required");
    require(steps >= 10, ErrorCategory::InvalidInput, "at least 10 steps are required");
    require(!qs.empty(), ErrorCategory::InvalidInput, "no quantile levels requested");
    for (double q : qs) {
        require(q > 0.0 && q < 1.0, ErrorCategory::InvalidInput, "quantile levels must lie in (0,1)");
    }
    const auto purpose = static_cast<std::uint32_t>(label.id) + 1;
    std::vector<double> values = simulate_functional(f, paths, steps, seed, purpose, threads);
    std::sort(values.begin(), values.end());

    CriticalValueTable t;
    t.functional = label;
    t.steps = steps;
    t.paths = paths;
    t.seed = seed;
    std::vector<double> levels(qs.begin(), qs.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (double q : levels) t.quantiles.emplace_back(q, order_statistic_quantile(values, q));
    return t;
}

CriticalValueTable estimate_quantiles(const FunctionalSpec& functional, std::size_t paths,
                                      std::size_t steps, std::span<const double> qs,
                                      std::uint64_t seed, unsigned threads) {
    const FunctionalSpec spec = functional;
    return estimate_quantiles_with(
        spec, [spec](const BrownianPath& p) { return spec.evaluate(p); }, paths, steps, qs, seed, threads);
}

}  // namespace tailshift
