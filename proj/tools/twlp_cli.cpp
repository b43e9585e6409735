// twlp: solve, check, bench and gen.
//
// Exit codes: 0 success, 1 solver failure (or a failed check), 2 bad input.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "twlp/corpus.hpp"
#include "twlp/errors.hpp"
#include "twlp/ipm.hpp"
#include "twlp/lp.hpp"
#include "twlp/reference.hpp"

using json = nlohmann::ordered_json;
using namespace twlp;

namespace {

constexpr int kOk = 0, kSolverFailure = 1, kInputError = 2;

// the environment wins over --seed so harnesses can pin runs externally
unsigned long long effective_seed(unsigned long long flag) {
  if (const char* env = std::getenv("TWLP_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw InputError("TWLP_SEED is not an unsigned integer");
    return v;
  }
  return flag;
}

SolveMode parse_mode(const std::string& s) {
  if (s == "exact") return SolveMode::Exact;
  if (s == "maintained") return SolveMode::Maintained;
  throw InputError("unknown mode '" + s + "'");
}

const char* mode_name(SolveMode m) { return m == SolveMode::Exact ? "exact" : "maintained"; }

double norm2(const std::vector<double>& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

Solution run_solve(const LpProblem& P, const TreeDecomposition& td, const SolveOptions& o) {
  P.validate();
  return solve(P.matrix(), P.b, P.c, P.lower, P.upper, td, o);
}

// ------------------------------------------------------------------ solve

struct SolveArgs {
  std::string lp, td, mode = "exact";
  double eps = 1e-6, radius = 0.0;
  unsigned long long seed = 1;
  int k = 0;
  bool json = false, timing = false, debug = false;
};

int cmd_solve(const SolveArgs& a) {
  const LpProblem P = read_lp_file(a.lp);
  const TreeDecomposition td = read_pace_td_file(a.td);
  SolveOptions o;
  o.mode = parse_mode(a.mode);
  o.eps = a.eps;
  o.seed = effective_seed(a.seed);
  o.window = a.k;
  o.debug = a.debug;
  o.inner_radius = a.radius > 0 ? a.radius : P.radius.value_or(0.0);
  const Solution s = run_solve(P, td, o);

  if (a.json) {
    json j;
    j["schema"] = 1;
    j["status"] = "optimal";
    j["mode"] = mode_name(s.mode);
    j["seed"] = o.seed;
    j["eps"] = o.eps;
    j["n"] = P.n;
    j["d"] = P.d;
    j["width"] = td.width();
    j["objective"] = s.objective;
    j["x"] = s.x;
    j["s"] = s.s;
    j["iterations"] = s.iterations;
    j["restarts"] = s.restarts;
    j["residual"] = s.residual;
    j["interior"] = s.interior;
    j["lipschitz"] = s.lipschitz;
    j["outer_radius"] = s.outer_radius;
    j["t_end"] = s.t_end;
    // wall time breaks bit-identical output, so only on request
    if (a.timing) j["seconds"] = s.seconds;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << std::setprecision(12);
    std::cout << "status      optimal\n"
              << "mode        " << mode_name(s.mode) << "\n"
              << "objective   " << s.objective << "\n"
              << "iterations  " << s.iterations << " (restarts " << s.restarts << ")\n"
              << "residual    " << std::setprecision(3) << s.residual << "\n"
              << "interior    " << (s.interior ? "yes" : "no") << "\n";
    if (a.timing) std::cout << "seconds     " << s.seconds << "\n";
  }
  return kOk;
}

// ------------------------------------------------------------------ check

struct CheckArgs {
  std::string mode = "both";
  double eps = 1e-6;
  unsigned long long seed = 1;
  int limit = 0, max_n = 0, threads = 1;
  bool json = false;
};

struct CheckRow {
  std::string name;
  int n = 0, d = 0, width = 0;
  double reference = 0.0, tol = 0.0;
  std::vector<std::pair<SolveMode, Solution>> runs;
  std::string error;
  bool pass = false;
};

CheckRow check_one(const CorpusEntry& e, const CheckArgs& a, const std::vector<SolveMode>& modes) {
  CheckRow r;
  r.name = e.name();
  try {
    const Instance I = e.generate();
    r.n = I.lp.n;
    r.d = I.lp.d;
    r.width = I.td.width();
    r.reference = reference_solve(I.lp).objective;
    const SparseMatrix A = I.lp.matrix();
    bool ok = true;
    for (SolveMode m : modes) {
      SolveOptions o;
      o.mode = m;
      o.eps = a.eps;
      o.seed = a.seed;
      Solution s = solve(A, I.lp.b, I.lp.c, I.lp.lower, I.lp.upper, I.td, o);
      r.tol = a.eps * s.lipschitz * s.outer_radius;
      const double feas = 1e-6 * (s.outer_radius * A.norm2_estimate() + norm2(I.lp.b));
      ok = ok && std::fabs(s.objective - r.reference) <= r.tol && s.residual <= feas && s.interior;
      r.runs.emplace_back(m, std::move(s));
    }
    if (r.runs.size() == 2) ok = ok && std::fabs(r.runs[0].second.objective - r.runs[1].second.objective) <= 2 * r.tol;
    r.pass = ok;
  } catch (const std::exception& ex) {
    r.error = ex.what();
  }
  return r;
}

int cmd_check(const CheckArgs& a) {
  std::vector<SolveMode> modes;
  if (a.mode == "both") modes = {SolveMode::Exact, SolveMode::Maintained};
  else modes = {parse_mode(a.mode)};

  std::vector<CorpusEntry> corpus;
  for (const CorpusEntry& e : builtin_corpus()) {
    if (a.max_n > 0 && e.generate().lp.n > a.max_n) continue;
    corpus.push_back(e);
  }
  if (a.limit > 0 && static_cast<int>(corpus.size()) > a.limit) corpus.resize(a.limit);

  // each solve stays sequential; instances run on a small pool
  std::vector<CheckRow> rows(corpus.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next++) < corpus.size();) rows[i] = check_one(corpus[i], a, modes);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::max(1, a.threads); ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  int failed = 0;
  for (const auto& r : rows) failed += !r.pass;
  if (a.json) {
    json j;
    j["schema"] = 1;
    j["instances"] = json::array();
    for (const auto& r : rows) {
      json e{{"name", r.name}, {"n", r.n}, {"d", r.d}, {"width", r.width}, {"reference", r.reference},
             {"tolerance", r.tol}, {"pass", r.pass}};
      for (const auto& [m, s] : r.runs)
        e[mode_name(m)] = {{"objective", s.objective}, {"iterations", s.iterations}, {"residual", s.residual}};
      if (!r.error.empty()) e["error"] = r.error;
      j["instances"].push_back(e);
    }
    j["failed"] = failed;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << std::left << std::setw(24) << "instance" << std::right << std::setw(6) << "n" << std::setw(4) << "w"
              << std::setw(12) << "|err|" << std::setw(11) << "tol" << std::setw(9) << "iters" << "  result\n";
    for (const auto& r : rows) {
      double err = 0.0;
      long it = 0;
      for (const auto& [m, s] : r.runs) {
        err = std::max(err, std::fabs(s.objective - r.reference));
        it = std::max(it, s.iterations);
      }
      std::cout << std::left << std::setw(24) << r.name << std::right << std::setw(6) << r.n << std::setw(4) << r.width
                << std::setw(12) << std::setprecision(3) << err << std::setw(11) << r.tol << std::setw(9) << it << "  "
                << (r.pass ? "ok" : "FAIL " + r.error) << "\n";
    }
    std::cout << rows.size() - failed << "/" << rows.size() << " passed\n";
  }
  return failed ? kSolverFailure : kOk;
}

// ------------------------------------------------------------------ bench

struct BenchArgs {
  std::string kind = "path-flow", mode = "exact", svg;
  std::vector<int> sizes{16, 64, 256};
  int width = 0;
  unsigned long long seed = 1;
  bool json = false;
};

struct BenchRow {
  int size = 0, n = 0, d = 0, width = 0;
  long nnz = 0, iterations = 0, restarts = 0;
  double seconds = 0.0, objective = 0.0;
};

// one panel: polyline with markers on log-log axes
std::string svg_panel(const std::vector<double>& xs, const std::vector<double>& ys, double ox, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel) {
  const double W = 360, H = 260, pad = 50;
  auto lg = [](double v) { return std::log10(std::max(v, 1e-12)); };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (size_t i = 0; i < xs.size(); ++i) {
    x0 = std::min(x0, lg(xs[i]));
    x1 = std::max(x1, lg(xs[i]));
    y0 = std::min(y0, lg(ys[i]));
    y1 = std::max(y1, lg(ys[i]));
  }
  if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double v) { return ox + pad + (lg(v) - x0) / (x1 - x0) * (W - 2 * pad); };
  auto py = [&](double v) { return H - pad - (lg(v) - y0) / (y1 - y0) * (H - 2 * pad); };
  std::ostringstream s;
  s << std::fixed << std::setprecision(1);
  s << "<text x='" << ox + W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title << "</text>\n";
  s << "<line x1='" << ox + pad << "' y1='" << H - pad << "' x2='" << ox + W - pad << "' y2='" << H - pad
    << "' stroke='black'/>\n";
  s << "<line x1='" << ox + pad << "' y1='" << pad << "' x2='" << ox + pad << "' y2='" << H - pad
    << "' stroke='black'/>\n";
  s << "<text x='" << ox + W / 2 << "' y='" << H - 12 << "' text-anchor='middle' font-size='12'>" << xlabel
    << " (log)</text>\n";
  s << "<text x='" << ox + 14 << "' y='" << H / 2 << "' text-anchor='middle' font-size='12' transform='rotate(-90 "
    << ox + 14 << " " << H / 2 << ")'>" << ylabel << " (log)</text>\n";
  s << "<polyline fill='none' stroke='steelblue' stroke-width='2' points='";
  for (size_t i = 0; i < xs.size(); ++i) s << px(xs[i]) << "," << py(ys[i]) << " ";
  s << "'/>\n";
  for (size_t i = 0; i < xs.size(); ++i) {
    s << "<circle cx='" << px(xs[i]) << "' cy='" << py(ys[i]) << "' r='3.5' fill='steelblue'/>\n";
    s << "<text x='" << px(xs[i]) + 5 << "' y='" << py(ys[i]) - 6 << "' font-size='10'>" << std::setprecision(3)
      << std::defaultfloat << ys[i] << std::fixed << std::setprecision(1) << "</text>\n";
  }
  return s.str();
}

int cmd_bench(const BenchArgs& a) {
  const auto kind = parse_instance_kind(a.kind);
  if (!kind) throw InputError("unknown instance kind '" + a.kind + "'");
  SolveOptions o;
  o.mode = parse_mode(a.mode);
  o.seed = effective_seed(a.seed);
  std::vector<BenchRow> rows;
  for (int size : a.sizes) {
    const Instance I = generate_instance(*kind, size, o.seed, a.width);
    const SparseMatrix A = I.lp.matrix();
    const Solution s = solve(A, I.lp.b, I.lp.c, I.lp.lower, I.lp.upper, I.td, o);
    rows.push_back({size, I.lp.n, I.lp.d, I.td.width(), A.nnz(), s.iterations, s.restarts, s.seconds, s.objective});
  }
  if (a.json) {
    json j;
    j["schema"] = 1;
    j["kind"] = a.kind;
    j["mode"] = a.mode;
    j["rows"] = json::array();
    for (const auto& r : rows)
      j["rows"].push_back({{"size", r.size}, {"n", r.n}, {"d", r.d}, {"width", r.width}, {"nnz", r.nnz},
                           {"iterations", r.iterations}, {"restarts", r.restarts}, {"seconds", r.seconds},
                           {"objective", r.objective}});
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << std::setw(7) << "size" << std::setw(7) << "n" << std::setw(6) << "d" << std::setw(4) << "w"
              << std::setw(8) << "nnz" << std::setw(9) << "iters" << std::setw(9) << "restarts" << std::setw(10)
              << "seconds" << "\n";
    for (const auto& r : rows)
      std::cout << std::setw(7) << r.size << std::setw(7) << r.n << std::setw(6) << r.d << std::setw(4) << r.width
                << std::setw(8) << r.nnz << std::setw(9) << r.iterations << std::setw(9) << r.restarts << std::setw(10)
                << std::fixed << std::setprecision(3) << r.seconds << std::defaultfloat << "\n";
  }
  if (!a.svg.empty()) {
    std::vector<double> n, it, nnz, sec;
    for (const auto& r : rows) {
      n.push_back(r.n);
      it.push_back(static_cast<double>(r.iterations));
      nnz.push_back(static_cast<double>(r.nnz));
      sec.push_back(std::max(r.seconds, 1e-4));
    }
    std::ofstream f(a.svg);
    if (!f) throw InputError("cannot write " + a.svg);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='720' height='260' font-family='sans-serif'>\n"
      << "<rect width='720' height='260' fill='white'/>\n"
      << svg_panel(n, it, 0, "Iterations vs problem size", "n", "iterations")
      << svg_panel(nnz, sec, 360, "Time vs nnz(A)", "nnz", "seconds") << "</svg>\n";
  }
  return kOk;
}

// ------------------------------------------------------------------ gen

struct GenArgs {
  std::string kind, out;
  int size = 0, width = 0;
  unsigned long long seed = 1;
};

int cmd_gen(const GenArgs& a) {
  const auto kind = parse_instance_kind(a.kind);
  if (!kind) throw InputError("unknown instance kind '" + a.kind + "'");
  const Instance I = generate_instance(*kind, a.size, effective_seed(a.seed), a.width);
  std::ofstream lp(a.out + ".lp"), td(a.out + ".td");
  if (!lp || !td) throw InputError("cannot write " + a.out + ".{lp,td}");
  lp << write_lp(I.lp);
  write_pace_td(td, I.td);
  std::cout << a.out << ".lp: d=" << I.lp.d << " n=" << I.lp.n << "; " << a.out << ".td: width " << I.td.width()
            << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear programs of small treewidth by robust path following"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "solve an LP file");
  solve_cmd->add_option("--lp", sa.lp, "LP text file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--td", sa.td, "PACE .td decomposition of the dual graph")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--mode", sa.mode, "exact | maintained")->check(CLI::IsMember({"exact", "maintained"}));
  solve_cmd->add_option("--eps", sa.eps, "accuracy, in (0, 1/2]");
  solve_cmd->add_option("--radius", sa.radius, "inner radius r");
  solve_cmd->add_option("--seed", sa.seed, "random seed (TWLP_SEED overrides)");
  solve_cmd->add_option("--k", sa.k, "maintained mode: steps between restarts");
  solve_cmd->add_flag("--json", sa.json, "JSON on stdout");
  solve_cmd->add_flag("--timing", sa.timing, "report wall time");
  solve_cmd->add_flag("--debug", sa.debug, "maintained mode: dense checks every step");

  CheckArgs ca;
  auto* check_cmd = app.add_subcommand("check", "compare against the reference solver on the built-in corpus");
  check_cmd->add_option("--mode", ca.mode, "exact | maintained | both")
      ->check(CLI::IsMember({"exact", "maintained", "both"}));
  check_cmd->add_option("--eps", ca.eps, "accuracy");
  check_cmd->add_option("--seed", ca.seed, "random seed");
  check_cmd->add_option("--limit", ca.limit, "first N instances only");
  check_cmd->add_option("--max-n", ca.max_n, "skip instances with more columns");
  check_cmd->add_option("--threads", ca.threads, "instances solved in parallel");
  check_cmd->add_flag("--json", ca.json, "JSON on stdout");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "scaling table over generated instances");
  bench_cmd->add_option("--kind", ba.kind, "path-flow | grid-flow | random-tw");
  bench_cmd->add_option("--sizes", ba.sizes, "instance sizes")->delimiter(',');
  bench_cmd->add_option("--width", ba.width, "generator width");
  bench_cmd->add_option("--mode", ba.mode, "exact | maintained")->check(CLI::IsMember({"exact", "maintained"}));
  bench_cmd->add_option("--seed", ba.seed, "random seed");
  bench_cmd->add_option("--svg", ba.svg, "write a plot");
  bench_cmd->add_flag("--json", ba.json, "JSON on stdout");

  GenArgs ga;
  auto* gen_cmd = app.add_subcommand("gen", "write a generated instance");
  gen_cmd->add_option("--kind", ga.kind, "path-flow | grid-flow | random-tw")->required();
  gen_cmd->add_option("--size", ga.size, "size (>= 2)")->required();
  gen_cmd->add_option("--width", ga.width, "generator width");
  gen_cmd->add_option("--seed", ga.seed, "random seed");
  gen_cmd->add_option("--out", ga.out, "output prefix, writes PREFIX.lp and PREFIX.td")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return kInputError;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(sa);
    if (check_cmd->parsed()) return cmd_check(ca);
    if (bench_cmd->parsed()) return cmd_bench(ba);
    if (gen_cmd->parsed()) return cmd_gen(ga);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const StructuralError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const ValueError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kInputError;
}
