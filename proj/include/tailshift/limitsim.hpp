#pragma once

// Monte Carlo simulation of the pivotal limit laws behind the interval and
// change-point procedures, and the critical-value tables built from them.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tailshift/kernels.hpp"
#include "tailshift/rng.hpp"

namespace tailshift {

// W(k/N) for k = 0..N with W(0) = 0, plus the cumulative moments the
// split-ratio functionals need.
class BrownianPath {
public:
    // W_k = N^{-1/2} sum_{j<=k} z_j. The increments are taken as given, which
    // also serves as the hook for deterministic test paths.
    static BrownianPath from_increments(std::span<const double> z);

    std::size_t steps() const noexcept { return w_.size() - 1; }
    std::span<const double> values() const noexcept { return w_; }
    double operator[](std::size_t k) const noexcept { return w_[k]; }
    kernels::PathMoments moments() const noexcept { return {w_, s1_, s2_, sj_}; }

    // W~(t) = W(1) - W(1 - t), again starting at zero.
    BrownianPath time_reversed() const;
    BrownianPath scaled(double factor) const;

    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

private:
    explicit BrownianPath(std::vector<double> w);

    std::vector<double> w_;
    std::vector<double> s1_, s2_, sj_;
};

BrownianPath simulate_path(std::size_t steps, RandomStream& rng);

// |W(1)| / sqrt( (1/N) sum_{k<N} (W(k/N) - (k/N) W(1))^2 ).
double lobato_pivot(const BrownianPath& path);

// sup over t = k/N, k in [ceil(trim N), N - ceil(trim N)], of
// (W(t) - t W(1))^2 / (int_0^t bridge^2 + int_t^1 bridge^2), with left-endpoint
// Riemann sums at step 1/N.
double g_functional(const BrownianPath& path, double trim_fraction);

// How the split ratio C/D of the multiple-change functional is normalised.
//  AsPrinted:     C and D both carry 1/(r3 - r1)^2, so C/D is the bare bridge ratio.
//  DataConsistent: C carries 1/(r3 - r1), matching the limit of the
//                  count-normalised sample statistic.
enum class HtildeNormalization { AsPrinted, DataConsistent };

struct HtildeValue {
    double forward = 0.0;
    double backward = 0.0;
    double total() const noexcept { return forward + backward; }
};

// The coarse grid {(1 + k delta)/2 : k integer} restricted to [delta, 1 - delta].
std::vector<double> coarse_grid(double delta);

// Index trim m = ceil(delta * n) shared by the sample statistic and the limit.
std::size_t delta_index_trim(double delta, std::size_t n);
// floor(n * g) with a guard against representation error in g.
std::size_t grid_index(double g, std::size_t n);
std::size_t ceil_index(double x);

// Forward sup over (k1, K2) with K2 = floor(N g), g in the coarse grid, and
// k1 in [m, K2 - m]; backward sup over (J1, k) with J1 on the grid and
// k in [J1 + m, N - m]; m = ceil(delta N).
HtildeValue htilde_functional(const BrownianPath& path, double delta,
                              HtildeNormalization norm = HtildeNormalization::DataConsistent);

enum class FunctionalId { LobatoPivot, G, Htilde };

std::string functional_name(FunctionalId id);
FunctionalId parse_functional(const std::string& s);

struct FunctionalSpec {
    FunctionalId id = FunctionalId::G;
    // Trim fraction for G, delta for Htilde, unused for the pivot.
    double param = 0.0;
    HtildeNormalization norm = HtildeNormalization::DataConsistent;

    double evaluate(const BrownianPath& path) const;
};

struct CriticalValueTable {
    FunctionalSpec functional;
    std::size_t steps = 0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<double, double>> quantiles;  // (q, value), ascending q
    std::optional<std::string> created;

    // Throws MissingTable when q is not in the table.
    double quantile(double q) const;
    // Cache file stem identifying (functional, params, steps, paths, seed).
    std::string key() const;
};

std::vector<double> default_quantile_levels();

// Draws `paths` functional values (path i from substream i of `seed`) and
// returns the ceil(q M)-th order statistic for each q. Bit-identical for a
// given (functional, paths, steps, seed) whatever the thread count.
CriticalValueTable estimate_quantiles(const FunctionalSpec& functional, std::size_t paths,
                                      std::size_t steps, std::span<const double> qs,
                                      std::uint64_t seed, unsigned threads = 0);

// Same, with an arbitrary functional (used by tests to pin the quantile rule).
CriticalValueTable estimate_quantiles_with(const FunctionalSpec& label,
                                           const std::function<double(const BrownianPath&)>& f,
                                           std::size_t paths, std::size_t steps,
                                           std::span<const double> qs, std::uint64_t seed,
                                           unsigned threads = 0);

// Raw functional draws in path order.
std::vector<double> simulate_functional(const std::function<double(const BrownianPath&)>& f,
                                        std::size_t paths, std::size_t steps, std::uint64_t seed,
                                        std::uint32_t purpose, unsigned threads = 0);

// ceil(q M)-th order statistic of an already sorted sample.
double order_statistic_quantile(std::span<const double> sorted, double q);

}  // namespace tailshift
