#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

// Deterministic randomness. std::mt19937_64 supplies the raw 64-bit stream,
// but every transform of that stream (unit doubles, bounded ints, shuffles)
// is written out here because the std::uniform_*_distribution adapters are
// implementation-defined and would break run-for-run reproducibility across
// standard libraries.

namespace cadre {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from (base seed, purpose, index) so
/// e.g. parameter init and dataset shuffling never share a stream, and each
/// clip of a synthetic dataset owns its own generator regardless of how many
/// clips precede it.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t purpose,
                              std::uint64_t index = 0) {
    constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = mix64(seed + kGolden);
    x = mix64(x ^ (purpose + kGolden));
    x = mix64(x ^ (index + kGolden));
    return x;
}

namespace seed_purpose {
constexpr std::uint64_t kParamInit = 1;
constexpr std::uint64_t kShuffle = 2;
constexpr std::uint64_t kClip = 3;
}  // namespace seed_purpose

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0,1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0,n) via 128-bit multiply-shift.
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("Rng::uniform_int: need n > 0");
        return static_cast<int>(
            (static_cast<unsigned __int128>(engine_()) * static_cast<std::uint64_t>(n)) >> 64);
    }

    /// Fisher-Yates, high index down, so the permutation stream is fixed.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(static_cast<int>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace cadre
