#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace twlp {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double to_unit(uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// mt19937_64 with platform-independent conversions (the std distributions
// are implementation defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : g_(seed) {}
  uint64_t bits() { return g_(); }
  double uniform() { return to_unit(g_()); }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  // in [0, n)
  int below(int n) { return static_cast<int>(uniform() * n) % n; }
  double normal() {
    double u1 = 1.0 - uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 g_;
};

// Standard normal keyed by (seed, a, b); stateless.
inline double keyed_normal(uint64_t seed, uint64_t a, uint64_t b) {
  uint64_t h = splitmix64(seed ^ splitmix64(a * 0x100000001b3ULL ^ splitmix64(b + 0x632be59bd9b4e019ULL)));
  double u1 = 1.0 - to_unit(h);
  double u2 = to_unit(splitmix64(h));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace twlp
