#pragma once

#include <cmath>
#include <cstdint>

namespace cdi {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Stream seed for replica r of rung g under a master seed; replicas are
/// reproducible and independent of worker scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t rung, std::uint64_t replica) {
    std::uint64_t s = master;
    splitmix64_next(s);
    s ^= 0x9e3779b97f4a7c15ull * (rung + 1);
    splitmix64_next(s);
    s ^= 0xbf58476d1ce4e5b9ull * (replica + 1);
    return splitmix64_next(s);
}

/// xoshiro256** with splitmix64 seeding.
class Xoshiro256ss {
  public:
    explicit Xoshiro256ss(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    std::uint64_t next() {
        std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    double uniform01() { return double(next() >> 11) * 0x1.0p-53; }          // [0, 1)
    double uniform_open() { return (double(next() >> 11) + 0.5) * 0x1.0p-53; }  // (0, 1)
    double exponential(double rate) { return -std::log(uniform_open()) / rate; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

/// Binomial(n, p) by inversion (small mean) or a mode-centered two-sided walk.
long binomial_draw(Xoshiro256ss& rng, long n, double p);

/// Binomial(n, p) conditioned on the outcome being >= 2.
long binomial_draw_ge2(Xoshiro256ss& rng, long n, double p);

}  // namespace cdi
