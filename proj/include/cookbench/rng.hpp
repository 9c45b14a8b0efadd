#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace cookbench {

// splitmix64, used to derive independent sub-seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(seed ^ mix_seed(stream));
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Deterministic RNG. mt19937_64 output is pinned by the standard; the helper
// distributions below are ours so results do not depend on libstdc++ details.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, n), rejection sampling to avoid modulo bias
    std::uint64_t uniform_u64(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = gen_();
        } while (r >= limit);
        return r % n;
    }

    // uniform integer in [lo, hi] inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform_u64(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // uniform in [0, 1)
    double uniform_real() { return (gen_() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_real(); }

    bool chance(double p) { return uniform_real() < p; }

    // standard Gumbel(0,1)
    double gumbel() {
        double u;
        do {
            u = uniform_real();
        } while (u <= 0.0);
        return -std::log(-std::log(u));
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[uniform_u64(v.size())];
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_u64(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), ascending order not guaranteed
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
    std::mt19937_64 gen_;
};

inline std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t k) {
    // Floyd's algorithm
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t j = n - k; j < n; ++j) {
        std::size_t t = uniform_u64(j + 1);
        bool seen = false;
        for (std::size_t x : out) {
            if (x == t) {
                seen = true;
                break;
            }
        }
        out.push_back(seen ? j : t);
    }
    return out;
}

}  // namespace cookbench
