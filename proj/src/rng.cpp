#include "tailshift/rng.hpp"

#include <cmath>
#include <numbers>

namespace tailshift {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline PhiloxBlock round(PhiloxBlock c, PhiloxKey k) noexcept {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key) noexcept {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        counter = round(counter, key);
    }
    return counter;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), stream_(stream) {}

std::uint32_t RandomStream::next_word() noexcept {
    if (used_ == 4) {
        const PhiloxBlock ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                              static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        const PhiloxKey key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
        buffer_ = philox4x32_10(ctr, key);
        ++block_;
        used_ = 0;
    }
    return buffer_[used_++];
}

double RandomStream::uniform() noexcept {
    const std::uint64_t a = next_word();
    const std::uint64_t b = next_word();
    const std::uint64_t bits = ((a << 21) ^ (b >> 11)) & ((std::uint64_t{1} << 53) - 1);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() noexcept {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

double RandomStream::gamma(double shape) noexcept {
    if (shape < 1.0) {
        const double g = gamma(shape + 1.0);
        return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = uniform();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

double RandomStream::chi_square(double v) noexcept {
    if (v == std::floor(v) && v >= 1.0 && v <= 64.0) {
        double s = 0.0;
        for (int i = 0; i < static_cast<int>(v); ++i) {
            const double z = normal();
            s += z * z;
        }
        return s;
    }
    return 2.0 * gamma(0.5 * v);
}

double RandomStream::student_t(double v) noexcept {
    const double z = normal();
    const double c = chi_square(v);
    return z / std::sqrt(c / v);
}

std::uint64_t substream_id(std::uint32_t purpose, std::uint64_t index) noexcept {
    // Upper 16 bits: purpose tag; lower 48 bits: item index.
    return (static_cast<std::uint64_t>(purpose & 0xFFFFu) << 48) | (index & ((std::uint64_t{1} << 48) - 1));
}

}  // namespace tailshift
