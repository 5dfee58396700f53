#pragma once

#include <array>
#include <cstdint>

namespace tailshift {

// Philox4x32-10 counter-based block function (Salmon et al., SC'11).
// Output depends only on (counter, key); there is no hidden state, which is
// what makes per-path and per-replication substreams schedule-independent.
using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key) noexcept;

// A sequential view of one Philox substream.
//
// Layout: key = master seed (low word, high word); counter = (block index low,
// block index high, stream low, stream high). Each block yields four 32-bit
// words consumed in order.
//
//   uniform():  two words (a, b) -> ((a << 21) ^ (b >> 11) + 0.5) * 2^-53, in (0,1)
//   normal():   Box-Muller on two consecutive uniforms u1, u2:
//               r = sqrt(-2 ln u1), z0 = r cos(2 pi u2), z1 = r sin(2 pi u2);
//               z0 is returned first, z1 is cached and returned by the next call.
//
// Any interleaving of uniform() and normal() calls is reproducible because
// both draw from the same word sequence.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept;

    double uniform() noexcept;
    double normal() noexcept;
    // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 uses the u^(1/shape) boost.
    double gamma(double shape) noexcept;
    // Chi-square with v degrees of freedom: sum of v squared normals when v is
    // an integer no larger than 64, 2 * Gamma(v / 2) otherwise.
    double chi_square(double v) noexcept;
    // Standard Student-t: normal() / sqrt(chi_square(v) / v).
    double student_t(double v) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint32_t next_word() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    PhiloxBlock buffer_{};
    int used_ = 4;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

// Derives the substream identifier for item `index` of a computation tagged
// `purpose`, so that different consumers of one master seed never overlap.
std::uint64_t substream_id(std::uint32_t purpose, std::uint64_t index) noexcept;

}  // namespace tailshift
