#ifndef ODYN_RANDOM_HPP
#define ODYN_RANDOM_HPP

#include <cstdint>
#include <limits>

namespace odyn {

/// Which part of a run a random stream feeds. Every stream is keyed by
/// (master seed, purpose, a, b) so that no two consumers ever share draws.
enum class StreamPurpose : std::uint64_t {
    placement = 1,
    weights = 2,
    beliefs = 3,
    mega_flags = 4,
    edges = 5,         // a = step, b = target agent
    mega_switch = 6,   // a = step, b = agent
    ensemble_seed = 7, // a = seed index
    shuffle = 8,
};

namespace detail {

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Counter-based generator (SplitMix64 output function over a keyed counter).
/// Satisfies UniformRandomBitGenerator, so Boost.Random distributions accept it.
class RandomStream {
public:
    using result_type = std::uint64_t;

    constexpr explicit RandomStream(std::uint64_t key = 0) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::golden_gamma);
    }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

constexpr std::uint64_t derive_key(std::uint64_t seed, StreamPurpose purpose,
                                   std::uint64_t a = 0, std::uint64_t b = 0) noexcept {
    std::uint64_t h = detail::mix64(seed ^ 0x6a09e667f3bcc909ULL);
    h = detail::mix64(h ^ (static_cast<std::uint64_t>(purpose) * detail::golden_gamma));
    h = detail::mix64(h ^ (a + 0x3c6ef372fe94f82bULL));
    h = detail::mix64(h ^ (b + 0xa54ff53a5f1d36f1ULL));
    return h;
}

constexpr RandomStream make_stream(std::uint64_t seed, StreamPurpose purpose,
                                   std::uint64_t a = 0, std::uint64_t b = 0) noexcept {
    return RandomStream(derive_key(seed, purpose, a, b));
}

/// Uniform double in [0, 1) with 53 random bits.
template <class Urbg>
double uniform01(Urbg& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in the open interval (0, 1).
template <class Urbg>
double uniform01_open(Urbg& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace odyn

#endif // ODYN_RANDOM_HPP
