#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "twlp/rng.hpp"
#include "twlp/sketch.hpp"

namespace twlp {

// [a, b], 1-based and inclusive
struct DyadicInterval {
  int a = 0, b = 0;
  bool operator==(const DyadicInterval&) const = default;
};

// Minimal partition of [a, b] into intervals [i 2^j + 1, (i+1) 2^j].
// Throws StructuralError unless 1 <= a <= b <= k.
std::vector<DyadicInterval> dyadic_cover(int a, int b, int k);

// Read access to a sequence of vectors y(0), y(1), ...
//   typeI(l, v)  = Phi_{chi(v)} y(l)
//   typeII(l, i) = y(l)_i
//   full(l)      = y(l), optional; used by the exhaustive fallback
struct VectorOracle {
  std::function<std::vector<double>(int, int)> typeI;
  std::function<double(int, int)> typeII;
  std::function<std::vector<double>(int)> full;
};

struct LinfOptions {
  double eps_apx = 0.1;
  double delta_apx = 0.05;
  double zeta = 1.0;  // bound on |y(l) - y(l-1)|_2
  int k = 1;          // horizon
  double C0 = 8.0;
  // read every coordinate when the sample budget of a step reaches n
  bool exhaustive_fallback = true;
  long max_samples = 0;  // per window, 0: no cap
  uint64_t seed = 1;
};

struct LinfStats {
  long samples = 0;
  long tries = 0;  // descents including rejected ones
  long type1 = 0, type2 = 0;
  long corrections = 0;
  long exhaustive = 0;
  long skipped = 0;  // windows with a zero root estimate
};

// Keeps z(l) with |z(l) - y(l)|_inf <= eps_apx (with high probability) by
// sampling coordinates of y(l) - y(l - 2^j) proportionally to their squares.
class LinfState {
 public:
  LinfState() = default;
  LinfState(const SamplingTree& S, VectorOracle O, std::vector<double> y0, const LinfOptions& opt);

  // Advances to version l+1; the oracle must already serve it.
  const std::vector<double>& query();

  int step() const { return l_; }
  const std::vector<double>& z() const { return z_; }
  const LinfOptions& options() const { return opt_; }
  const LinfStats& stats() const { return stats_; }
  // coordinates corrected by the last query
  const std::vector<int>& last_changed() const { return changed_; }
  // windows (as version intervals) sampled by the last query
  const std::vector<DyadicInterval>& last_windows() const { return windows_; }

  long samples_for(int j) const;
  // coordinate drawn with probability ~ (y(b) - y(a))_i^2, -1 when the
  // difference is zero in the sketch
  int sample(int a, int b);
  double estimate(int a, int b, int v);

 private:
  double read(int version, int i);
  std::vector<double>& cache(int a, int b);
  double estimate(int a, int b, int v, std::vector<double>& c);

  const SamplingTree* S_ = nullptr;
  VectorOracle O_;
  LinfOptions opt_;
  int n_ = 0, l_ = 0;
  std::vector<double> z_;
  Rng rng_{1};
  LinfStats stats_;
  std::vector<int> changed_;
  std::vector<DyadicInterval> windows_;
  std::map<std::pair<int, int>, std::vector<double>> est_;
  std::unordered_map<long, double> reads_;
};

}  // namespace twlp
