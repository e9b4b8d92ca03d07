#pragma once

#include <cmath>
#include <cstdint>

namespace stpp {

// Counter-based random streams. Every draw site is keyed by
// (seed, stream, counter), so results do not depend on the order in which
// agents are processed or on any thread schedule.

inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t counter) {
  std::uint64_t s = seed;
  (void)splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ull * (stream + 1);
  (void)splitmix64(s);
  s ^= 0xc2b2ae3d27d4eb4full * (counter + 1);
  return splitmix64(s);
}

// One independent stream. Construction cost is a few integer mixes, so
// creating a fresh stream per (agent, iteration) is the intended usage.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
      : state_(mix_key(seed, stream, counter)) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the paired value is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stream ids carve the key space by purpose so that data generation,
// gradient sampling and repetitions never collide.
namespace streams {
constexpr std::uint64_t kind(std::uint64_t tag, std::uint64_t agent) {
  return (tag << 32) | agent;
}
constexpr std::uint64_t common = 0;     // shared ground-truth vector
constexpr std::uint64_t hetero = 1;     // per-agent shifts
constexpr std::uint64_t feature = 2;    // per-agent feature rows
constexpr std::uint64_t label = 3;      // per-agent label coins
constexpr std::uint64_t gradient = 4;   // per-(agent, iteration) draws
constexpr std::uint64_t curvature = 5;  // quadratic spectra
constexpr std::uint64_t offset = 6;     // quadratic minimizer offsets
}  // namespace streams

// Derives the per-repetition master seed for experiment repetitions.
inline std::uint64_t rep_seed(std::uint64_t master_seed, std::uint64_t rep) {
  return mix_key(master_seed, 0x5eedf0c05eedf0c0ull, rep);
}

}  // namespace stpp
