#pragma once

#include <array>
#include <cstdint>

namespace wcoda {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A (seed, stream) pair fixes the key and the upper counter words; draws advance the
/// lower 64 counter bits. Replicate b of a bootstrap uses stream b, so results do not
/// depend on how replicates are scheduled.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_{stream} {}

    static Block bijection(Block ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

    std::uint64_t next_u64() {
        if (used_ >= 2) {
            block_ = bijection({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                               key_);
            ++counter_;
            used_ = 0;
        }
        const std::uint64_t out = (static_cast<std::uint64_t>(block_[2 * used_ + 1]) << 32) | block_[2 * used_];
        ++used_;
        return out;
    }

    /// Uniform integer in [0, bound) by Lemire's multiply-and-reject.
    std::uint64_t uniform_index(std::uint64_t bound) {
        __extension__ using Wide = unsigned __int128;
        if (bound <= 1) return 0;
        const std::uint64_t threshold = (0 - bound) % bound;
        while (true) {
            const Wide m = static_cast<Wide>(next_u64()) * bound;
            if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

    Key key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    Block block_{};
    int used_ = 2;
};

} // namespace wcoda
