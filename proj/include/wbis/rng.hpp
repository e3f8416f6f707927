#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace wbis {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A stream is identified by (seed, stream_id): the seed forms the 64-bit
/// key, the stream id occupies the upper half of the 128-bit counter and the
/// lower half counts blocks. Distinct stream ids therefore never share a
/// counter value, so streams never overlap.
///
/// Satisfies std::uniform_random_bit_generator with 32-bit output.
class Philox4x32
{
public:
    using result_type = std::uint32_t;

    Philox4x32(std::uint64_t seed, std::uint64_t stream_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          counter_{0, 0, static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)}
    {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        if (index_ == 4) {
            block_ = philox_block(counter_, key_);
            increment();
            index_ = 0;
        }
        return block_[index_++];
    }

    /// Uniform double in (0, 1) with 53 random bits; never returns 0 or 1.
    double uniform()
    {
        const std::uint64_t hi = (*this)();
        const std::uint64_t lo = (*this)();
        const std::uint64_t bits = ((hi << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    using block_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    /// Ten-round Philox bijection of one counter block.
    static block_type philox_block(block_type ctr, key_type key)
    {
        constexpr std::uint32_t m0 = 0xD2511F53;
        constexpr std::uint32_t m1 = 0xCD9E8D57;
        constexpr std::uint32_t w0 = 0x9E3779B9;
        constexpr std::uint32_t w1 = 0xBB67AE85;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += w0;
            key[1] += w1;
        }
        return ctr;
    }

private:
    void increment()
    {
        if (++counter_[0] == 0) {
            ++counter_[1];
        }
    }

    key_type key_;
    block_type counter_;
    block_type block_{};
    int index_ = 4;
};

/// Standard normal draws by the Marsaglia polar method; caches the second
/// variate of each accepted pair.
class StandardNormal
{
public:
    template <class Engine>
    double operator()(Engine& rng)
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * rng.uniform() - 1.0;
            v = 2.0 * rng.uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        has_spare_ = true;
        return u * scale;
    }

    void reset() { has_spare_ = false; }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Stream ids reserved for non-repeat work; repeat streams use ids below
/// reserved_stream_base.
namespace stream_ids {
inline constexpr std::uint64_t reserved_stream_base = 0xFFFF'0000'0000'0000ULL;
inline constexpr std::uint64_t portfolio_build = reserved_stream_base + 1;
inline constexpr std::uint64_t cross_entropy_fit = reserved_stream_base + 2;
inline constexpr std::uint64_t reference = reserved_stream_base + 0x1'0000'0000ULL;
} // namespace stream_ids

} // namespace wbis
