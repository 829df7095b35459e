#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

namespace autoopt {

// splitmix64 finalizer; used both for seed mixing and for hashing ids.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

// derive a child seed from a hierarchy of identifiers
template <typename... Ids>
std::uint64_t derive_seed(std::uint64_t master, Ids... ids) {
    std::uint64_t h = master;
    ((h = hash_combine(h, static_cast<std::uint64_t>(ids))), ...);
    return h;
}

// Seeded random stream with hand-rolled distributions so that results are
// identical across standard libraries (std::*_distribution is not portable).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix64(seed)) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t bits() { return engine_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::size_t index(std::size_t n) {
        return n == 0 ? 0 : static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    // integer in [lo, hi] inclusive
    long long integer(long long lo, long long hi) {
        return lo + static_cast<long long>(index(static_cast<std::size_t>(hi - lo + 1)));
    }

    bool chance(double p) { return uniform() < p; }

    // standard normal via polar Box-Muller, one cached value
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // standard Cauchy
    double cauchy() { return std::tan(std::numbers::pi * (uniform() - 0.5)); }

    // k distinct indices from [0, n), k <= n
    std::vector<std::size_t> distinct(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + index(n - i)]);
        pool.resize(k);
        return pool;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

    // independent stream derived from the creating seed and a stream tag
    Rng fork(std::uint64_t tag) const { return Rng(hash_combine(seed_, tag)); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace autoopt
