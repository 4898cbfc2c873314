#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace kpz {

using Philox4x64Counter = std::array<std::uint64_t, 4>;
using Philox4x64Key = std::array<std::uint64_t, 2>;

// Philox4x64 with 10 rounds (Salmon et al., SC11).
Philox4x64Counter philox4x64(Philox4x64Counter ctr, Philox4x64Key key) noexcept;

/// Counter-mode stream over philox4x64. Counter word 0 is the block index,
/// words 1..3 are fixed at construction. Satisfies UniformRandomBitGenerator.
class PhiloxStream {
public:
    using result_type = std::uint64_t;

    PhiloxStream(Philox4x64Key key, std::uint64_t w1, std::uint64_t w2, std::uint64_t w3) noexcept
        : key_(key), ctr_{0, w1, w2, w3} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (pos_ == 4) {
            buf_ = philox4x64(ctr_, key_);
            ++ctr_[0];
            pos_ = 0;
        }
        return buf_[pos_++];
    }

private:
    Philox4x64Key key_;
    Philox4x64Counter ctr_;
    Philox4x64Counter buf_{};
    int pos_ = 4;
};

}  // namespace kpz
