#pragma once

#include <array>
#include <cstdint>

namespace absorb {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// The key carries the 64-bit seed; the upper counter words carry the stream
/// id, so stream j of seed s is the same sequence regardless of which worker
/// draws it.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block bijection(Block counter, Key key);

    Philox4x32(std::uint64_t seed, std::uint64_t stream);

    std::uint32_t next_u32();

    /// Uniform double in [0, 1) with 32 bits of resolution.
    double next_uniform() { return static_cast<double>(next_u32()) * 0x1.0p-32; }

    std::uint64_t stream() const { return stream_; }

private:
    Key key_;
    std::uint64_t stream_;
    std::uint64_t block_index_ = 0;
    Block buffer_{};
    unsigned used_ = 4;
};

}  // namespace absorb
