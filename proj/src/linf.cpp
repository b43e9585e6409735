#include "twlp/linf.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "twlp/errors.hpp"

namespace twlp {

std::vector<DyadicInterval> dyadic_cover(int a, int b, int k) {
  if (a < 1 || a > b || b > k) throw StructuralError("bad dyadic range");
  std::vector<DyadicInterval> out;
  while (a <= b) {
    long len = 1;
    while ((a - 1) % (2 * len) == 0 && a - 1 + 2 * len <= b) len *= 2;
    out.push_back({a, static_cast<int>(a + len - 1)});
    a += static_cast<int>(len);
  }
  return out;
}

LinfState::LinfState(const SamplingTree& S, VectorOracle O, std::vector<double> y0, const LinfOptions& opt)
    : S_(&S), O_(std::move(O)), opt_(opt), n_(static_cast<int>(S.leaf_of.size())), z_(std::move(y0)), rng_(opt.seed) {
  if (static_cast<int>(z_.size()) != n_) throw StructuralError("initial vector has the wrong length");
  if (!(opt_.eps_apx > 0) || !(opt_.delta_apx > 0) || opt_.k < 1) throw ValueError("bad l-inf parameters");
}

long LinfState::samples_for(int j) const {
  const double e = opt_.eps_apx, z = opt_.zeta, k = opt_.k;
  const double lk = std::log(k + 2.0);
  const double v = opt_.C0 * std::pow(4.0, j) * z * z / (e * e) * lk * lk * lk *
                   std::log(n_ * k * z / (e * opt_.delta_apx) + M_E);
  long b = v >= 1e18 ? static_cast<long>(1e18) : static_cast<long>(std::ceil(v));
  if (opt_.max_samples > 0) b = std::min(b, opt_.max_samples);
  return std::max(b, 1L);
}

double LinfState::read(int version, int i) {
  const long key = static_cast<long>(version) * n_ + i;
  auto it = reads_.find(key);
  if (it != reads_.end()) return it->second;
  ++stats_.type2;
  double v = O_.typeII(version, i);
  reads_.emplace(key, v);
  return v;
}

std::vector<double>& LinfState::cache(int a, int b) {
  auto& c = est_[{a, b}];
  if (c.empty()) c.assign(static_cast<size_t>(S_->size()), -1.0);
  return c;
}

double LinfState::estimate(int a, int b, int v) { return estimate(a, b, v, cache(a, b)); }

double LinfState::estimate(int a, int b, int v, std::vector<double>& c) {
  if (c[v] >= 0.0) return c[v];
  double e = 0.0;
  if (a != b) {
    stats_.type1 += 2;
    const std::vector<double> ya = O_.typeI(a, v), yb = O_.typeI(b, v);
    for (size_t q = 0; q < ya.size(); ++q) e += (ya[q] - yb[q]) * (ya[q] - yb[q]);
  }
  c[v] = e;
  return e;
}

int LinfState::sample(int a, int b) {
  std::vector<double>& c = cache(a, b);
  const double root = estimate(a, b, S_->root, c);
  if (!(root > 1e-24)) return -1;
  for (long tries = 0; tries < 1000000; ++tries) {
    ++stats_.tries;
    int v = S_->root;
    double p = 1.0;
    bool dead = false;
    while (!S_->is_leaf(v)) {
      const auto& ch = S_->nodes[v].children;
      double sum = 0.0;
      for (int u : ch) sum += estimate(a, b, u, c);
      if (!(sum > 0.0)) {
        dead = true;
        break;
      }
      double x = rng_.uniform() * sum;
      size_t q = 0;
      while (q + 1 < ch.size() && x >= c[ch[q]]) x -= c[ch[q++]];
      p *= c[ch[q]] / sum;
      v = ch[q];
    }
    if (dead) continue;
    const int i = S_->nodes[v].chi[0];
    const double d = read(a, i) - read(b, i);
    if (rng_.uniform() * 10.0 * p * root < d * d) {
      ++stats_.samples;
      return i;
    }
  }
  throw SolverError("sampler did not accept within the try limit");
}

const std::vector<double>& LinfState::query() {
  if (l_ >= opt_.k) throw SolverError("l-inf horizon exceeded");
  ++l_;
  changed_.clear();
  windows_.clear();
  est_.clear();
  reads_.clear();

  std::vector<int> js;
  double budget = 0.0;
  for (int j = 0; (1L << j) <= l_; ++j) {
    if (l_ % (1L << j) != 0) continue;
    js.push_back(j);
    budget += static_cast<double>(samples_for(j));
  }
  for (int j : js) windows_.push_back({l_ - (1 << j) + 1, l_});

  auto correct = [&](int i, double v) {
    if (std::fabs(v - z_[i]) > opt_.eps_apx) {
      z_[i] = v;
      changed_.push_back(i);
      ++stats_.corrections;
    }
  };
  if (opt_.exhaustive_fallback && budget >= n_) {
    ++stats_.exhaustive;
    if (O_.full) {
      const std::vector<double> y = O_.full(l_);
      for (int i = 0; i < n_; ++i) correct(i, y[i]);
    } else {
      for (int i = 0; i < n_; ++i) correct(i, read(l_, i));
    }
    return z_;
  }

  std::set<int> picked;
  for (int j : js) {
    const int a = l_ - (1 << j);
    if (!(estimate(a, l_, S_->root) > 1e-24)) {
      ++stats_.skipped;
      continue;
    }
    const long B = samples_for(j);
    for (long q = 0; q < B; ++q) {
      const int i = sample(a, l_);
      if (i >= 0) picked.insert(i);
    }
  }
  for (int i : picked) correct(i, read(l_, i));
  std::sort(changed_.begin(), changed_.end());
  return z_;
}

}  // namespace twlp
