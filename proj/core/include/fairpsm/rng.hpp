#pragma once

#include <cstdint>
#include <vector>

namespace fairpsm {

// xoshiro256** seeded through splitmix64. Every shuffle and subsample in the
// toolkit flows through this generator so that results are bit-reproducible
// across platforms and standard library versions (std::mt19937 ordering is
// portable but std::shuffle is not).
class Rng {
public:
    explicit Rng(uint64_t seed) {
        // splitmix64 expansion of the scalar seed into the 256-bit state
        uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    uint64_t next() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform integer in [0, bound) by rejection, so no modulo bias.
    uint64_t below(uint64_t bound) {
        const uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t state_[4];
};

// Fisher-Yates; identical output for identical (values, rng state).
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
    for (size_t i = values.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.below(i));
        std::swap(values[i - 1], values[j]);
    }
}

// k distinct elements drawn uniformly without replacement, in shuffled order.
template <typename T>
std::vector<T> sample_without_replacement(const std::vector<T>& pool, size_t k, Rng& rng) {
    std::vector<T> scratch = pool;
    if (k > scratch.size()) k = scratch.size();
    // partial Fisher-Yates: first k slots end up uniformly sampled
    for (size_t i = 0; i < k; ++i) {
        size_t j = i + static_cast<size_t>(rng.below(scratch.size() - i));
        std::swap(scratch[i], scratch[j]);
    }
    scratch.resize(k);
    return scratch;
}

} // namespace fairpsm
