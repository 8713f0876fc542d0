#pragma once

#include <cstdint>
#include <limits>

namespace polyfield {

/// splitmix64 finalizer; used to derive independent keyed substreams.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
    return mix64(mix64(mix64(seed) ^ a) + b);
}

/// Small counter-based stream. Identical (key) gives an identical sequence on
/// every platform, which std:: distributions do not guarantee.
class Stream {
public:
    using result_type = std::uint64_t;

    explicit Stream(std::uint64_t key = 0) noexcept : state_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept {
        const auto r = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
        return r < n ? r : n - 1;
    }

private:
    std::uint64_t state_;
};

} // namespace polyfield
