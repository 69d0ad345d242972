#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

namespace ssrgan {

/// Deterministic 64-bit PRNG: xoshiro256** 1.0 (Blackman & Vigna), state
/// seeded through splitmix64 as its authors recommend. The same seed yields
/// the same stream on every platform.
///
/// Reference outputs, seed 42:
///   next_u64(): 0x15780b2e0c2ec716, 0x6104d9866d113a7e,
///               0xae17533239e499a1, 0x90fbcce02ee3eac7
///   next_double(): 0.083862971059882163, 0.37898025066266861
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] ^= rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 mantissa bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double next_double(double lo, double hi) { return lo + next_double() * (hi - lo); }

    /// Unbiased uniform integer in [0, n). n must be nonzero.
    std::uint64_t next_below(std::uint64_t n) {
        // rejection sampling over the largest multiple of n below 2^64
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x > limit);
        return x % n;
    }

    /// Fisher-Yates shuffle in a fixed, platform-independent order.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

    std::array<std::uint64_t, 4> state() const { return state_; }
    void set_state(const std::array<std::uint64_t, 4>& s) { state_ = s; }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

/// Mixes extra words into a seed; used to derive independent per-image or
/// per-purpose streams from one run seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t x = base ^ (salt + 0x9e3779b97f4a7c15ull + (base << 6) + (base >> 2));
    return Rng::splitmix64(x);
}

} // namespace ssrgan
