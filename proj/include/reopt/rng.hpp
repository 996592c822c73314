#pragma once

#include <array>
#include <cstdint>

namespace reopt {

/// Philox4x32-10 block cipher (Salmon et al., SC'11). Stateless: the output
/// is a pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based stream keyed by (seed, stream id). Streams with different
/// ids never overlap, so path i can be simulated by any worker and produce
/// the same draws.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;
    /// Standard normal via Box-Muller (cosine branch).
    double normal() noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;  // 32-bit words consumed from buffer_
};

}  // namespace reopt
