#pragma once

#include <cstdint>

namespace ftk {

/// Counter-based generator: draw i of stream s is a pure function of
/// (seed, s, i), so blocks of samples can be produced in any order and
/// still merge into the same sequence. Bits come from the SplitMix64
/// finalizer; normals from Box-Muller.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;
    double normal() noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ftk
