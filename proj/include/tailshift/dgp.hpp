#pragma once

// Seeded generators for the simulation designs:
//   AR(1):   X_{i+1} = phi X_i + eps_i
//   ARCH(1): X_{i+1} = sqrt(beta + lambda X_i^2) eps_i
// with normal or Student-t innovations and optional regime schedules.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tailshift/rng.hpp"
#include "tailshift/series.hpp"

namespace tailshift {

enum class DgpFamily { AR1, ARCH1 };
enum class Innovation { Normal, StudentT };
enum class InitMode { Stationary, BurnIn };

// From index i > [n * fraction] on, the innovation eps_i (which produces
// X_{i+1}) uses `value`: the t degrees of freedom for AR(1), lambda for ARCH(1).
struct RegimeChange {
    double fraction = 0.5;
    double value = 0.0;
};

struct DgpSpec {
    DgpFamily family = DgpFamily::AR1;
    double phi = 0.5;      // AR(1)
    double beta = 1.0;     // ARCH(1)
    double lambda = 0.3;   // ARCH(1)
    Innovation innovation = Innovation::Normal;
    double df = 16.5;      // Student-t innovations
    InitMode init = InitMode::Stationary;
    std::size_t burn_in = 5000;
    std::vector<RegimeChange> regimes;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    void validate() const;

    static DgpSpec ar1(double phi, std::size_t n, std::uint64_t seed);
    static DgpSpec arch1(double beta, double lambda, std::size_t n, std::uint64_t seed);
    // The three-regime AR(1): t(16.5) innovations, t(v) on ([n/3], [2n/3]],
    // burn-in 5000.
    static DgpSpec three_regime_ar1(double v, std::size_t n, std::uint64_t seed);
};

TimeSeries gen_ar1(const DgpSpec& spec);
TimeSeries gen_arch1(const DgpSpec& spec);
TimeSeries generate(const DgpSpec& spec);

// Adds `magnitude` to every X_i with i > [n * at_fraction].
TimeSeries inject_location_shift(const TimeSeries& series, double at_fraction, double magnitude);

double sample_normal(RandomStream& rng);
double sample_student_t(double v, RandomStream& rng);

std::string dgp_family_name(DgpFamily f);
DgpFamily parse_dgp_family(const std::string& s);

}  // namespace tailshift
