#pragma once

#include <memory>
#include <vector>

#include "twlp/errors.hpp"
#include "twlp/ipm.hpp"
#include "twlp/linf.hpp"
#include "twlp/multiscale.hpp"
#include "twlp/sketch.hpp"

namespace twlp {

struct CpmOptions {
  unsigned long long seed = 1;
  int window = 0;  // steps between restarts, 0: ceil(sqrt(n))
  bool debug = false;
  // l-inf structures: read every coordinate once a step's sample budget
  // reaches n (with the default constants this is every step)
  bool exhaustive_fallback = true;
  long max_samples = 0;  // per dyadic window, 0: no cap
  double C0 = 8.0;
  long total_steps = 100000;  // N, bounds the failure probability
  int sketch_dim = 0;         // 0: default_sketch_dim
};

// Centering with the implicit (multiscale) representation of (x, s).  Each
// step moves the representation, refreshes x_bar and s_bar from the two
// l-inf structures, and applies the change as a sparse update.  The whole
// structure is rebuilt from the current (x, s) when t leaves the eps_t band
// around t_bar or after `window` steps.
class MaintainedEngine final : public CenteringEngine {
 public:
  explicit MaintainedEngine(CpmOptions o) : opt_(o) {}
  std::string name() const override { return "maintained"; }
  void start(const CenteringProblem& P, const IpmParams& prm, const CenteringOptions& opt,
             const PathPoint& p) override;
  double advance(double t, double t_end, CenteringStats& stats) override;
  PathPoint point() override;

  // the next advance rebuilds regardless of t
  void force_restart() { force_ = true; }

  // inspection, mostly for tests
  const MultiscaleState& state() const { return *ms_; }
  const SamplingTree& sampling_tree() const { return tree_; }
  const SketchMatrix& sketch() const { return Phi_; }
  int window() const { return k_; }
  int window_step() const { return ell_; }
  double t_bar() const { return t_bar_; }
  bool sampling() const { return sampling_; }
  const LinfState& linf_x() const { return *lx_; }
  const LinfState& linf_s() const { return *ls_; }
  // H^1/2 x and H^-1/2 s at the current step, recomputed densely
  std::vector<double> target_x() const { return ms_->scaled_x(); }
  std::vector<double> target_s() const { return ms_->scaled_s(); }
  VectorOracle oracle_x();
  VectorOracle oracle_s();

 private:
  void initialize(const std::vector<double>& x, const std::vector<double>& y, double t);
  void build_sketches();
  void snapshot();
  void apply_pending();
  std::vector<double> type1(bool xside, int version, int node);
  double type2(bool xside, int version, int i);
  std::vector<double> sketch_of(const std::vector<double>& v, int node) const;
  const std::vector<double>& coefficient_vector(bool xside);

  CpmOptions opt_;
  const CenteringProblem* P_ = nullptr;
  IpmParams prm_;
  CenteringOptions copt_;
  int n_ = 0, k_ = 1;
  SamplingTree tree_;
  SketchMatrix Phi_;

  std::unique_ptr<MultiscaleState> ms_;
  double t_bar_ = 0.0, alpha_ = 0.0;
  int ell_ = 0;
  bool force_ = false;
  uint64_t windows_ = 0;

  // x_bar, s_bar chosen by the last step, applied lazily on the next one
  bool pending_ = false;
  std::vector<int> pend_S_;
  std::vector<double> pend_x_, pend_s_;

  // represented (x, s, y) cached between a move and the next change
  bool have_out_ = false;
  std::vector<double> out_x_, out_s_;

  std::unique_ptr<LinfState> lx_, ls_;
  bool sampling_ = false;
  std::unique_ptr<BalancedSketch> bs_;
  VectorSketch vs_xh_, vs_cx_, vs_sh_;
  std::vector<std::vector<double>> snap_x_, snap_s_;
  std::vector<double> ux_, us_;
  int u_stamp_x_ = -1, u_stamp_s_ = -1;
};

}  // namespace twlp
