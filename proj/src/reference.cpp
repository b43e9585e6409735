#include "twlp/reference.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>

#include "twlp/errors.hpp"

namespace twlp {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

SpMat to_eigen(const LpProblem& P) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(P.entries.size());
  for (const auto& e : P.entries) t.emplace_back(e.row, e.col, e.val);
  SpMat A(P.d, P.n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv(i) < 0) a = std::min(a, -v(i) / dv(i));
  return a;
}

}  // namespace

ReferenceResult reference_solve(const LpProblem& P, double tol, int max_iter) {
  P.validate();
  const int n = P.n, d = P.d;
  const SpMat A = to_eigen(P);
  const SpMat At = A.transpose();
  Eigen::Map<const Eigen::VectorXd> c(P.c.data(), n), lo(P.lower.data(), n), hi(P.upper.data(), n);
  Eigen::Map<const Eigen::VectorXd> b0(P.b.data(), d);
  const Eigen::VectorXd U = hi - lo;
  const Eigen::VectorXd b = b0 - A * lo;  // in terms of v = x - lo

  // v + w = U, A v = b, A^T y + z - q = c, v z = w q = mu
  Eigen::VectorXd v = U / 2, w = U / 2, y = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd z(n), q(n);
  for (int i = 0; i < n; ++i) {
    z(i) = std::max(c(i), 0.0) + 1.0;
    q(i) = std::max(-c(i), 0.0) + 1.0;
  }
  const double bn = 1.0 + b0.norm(), cn = 1.0 + c.norm();

  ReferenceResult out;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  bool analyzed = false;
  for (int it = 0; it <= max_iter; ++it) {
    const Eigen::VectorXd rp = b - A * v;
    const Eigen::VectorXd rd = c - At * y - z + q;
    const Eigen::VectorXd ru = U - v - w;
    const double mu = (v.dot(z) + w.dot(q)) / (2.0 * n);
    const double obj = c.dot(v + lo);
    if (rp.norm() / bn <= tol && rd.norm() / cn <= tol && 2.0 * n * mu / (1.0 + std::abs(obj)) <= tol) {
      out.iterations = it;
      out.gap = 2.0 * n * mu;
      break;
    }
    if (it == max_iter) throw SolverError("reference solver: iteration limit");

    const Eigen::VectorXd Dinv = z.cwiseQuotient(v) + q.cwiseQuotient(w);
    const Eigen::VectorXd D = Dinv.cwiseInverse();
    SpMat M = A * D.asDiagonal() * At;
    if (d > 0) {
      double diag = 0.0;
      for (int k = 0; k < d; ++k) diag = std::max(diag, M.coeff(k, k));
      for (int k = 0; k < d; ++k) M.coeffRef(k, k) += 1e-15 * diag;
      if (!analyzed) {
        ldlt.analyzePattern(M);
        analyzed = true;
      }
      ldlt.factorize(M);
      if (ldlt.info() != Eigen::Success) throw SolverError("reference solver: normal equations singular");
    }

    // solves for given complementarity targets rvz = target - v z, rwq = target - w q
    auto direction = [&](const Eigen::VectorXd& rvz, const Eigen::VectorXd& rwq, Eigen::VectorXd& dv,
                         Eigen::VectorXd& dw, Eigen::VectorXd& dy, Eigen::VectorXd& dz, Eigen::VectorXd& dq) {
      const Eigen::VectorXd g = rd - rvz.cwiseQuotient(v) + (rwq - q.cwiseProduct(ru)).cwiseQuotient(w);
      if (d > 0) {
        dy = ldlt.solve(rp + A * D.cwiseProduct(g));
      } else {
        dy.resize(0);
      }
      dv = D.cwiseProduct(At * dy - g);
      dw = ru - dv;
      dz = (rvz - z.cwiseProduct(dv)).cwiseQuotient(v);
      dq = (rwq - q.cwiseProduct(dw)).cwiseQuotient(w);
    };

    Eigen::VectorXd dv, dw, dy, dz, dq;
    direction(-v.cwiseProduct(z), -w.cwiseProduct(q), dv, dw, dy, dz, dq);
    double ap = std::min(max_step(v, dv), max_step(w, dw));
    double ad = std::min(max_step(z, dz), max_step(q, dq));
    const double mu_aff =
        ((v + ap * dv).dot(z + ad * dz) + (w + ap * dw).dot(q + ad * dq)) / (2.0 * n);
    const double sigma = std::pow(mu_aff / mu, 3);
    const Eigen::VectorXd rvz = Eigen::VectorXd::Constant(n, sigma * mu) - v.cwiseProduct(z) - dv.cwiseProduct(dz);
    const Eigen::VectorXd rwq = Eigen::VectorXd::Constant(n, sigma * mu) - w.cwiseProduct(q) - dw.cwiseProduct(dq);
    direction(rvz, rwq, dv, dw, dy, dz, dq);
    ap = std::min(1.0, 0.995 * std::min(max_step(v, dv), max_step(w, dw)));
    ad = std::min(1.0, 0.995 * std::min(max_step(z, dz), max_step(q, dq)));
    v += ap * dv;
    w += ap * dw;
    y += ad * dy;
    z += ad * dz;
    q += ad * dq;
    out.iterations = it + 1;
  }
  Eigen::VectorXd x = lo + v;
  // w and v drift apart only by roundoff; keep x inside the box
  for (int i = 0; i < n; ++i) x(i) = std::clamp(x(i), lo(i), hi(i));
  out.x.assign(x.data(), x.data() + n);
  out.objective = c.dot(x);
  out.residual = (A * x - b0).norm();
  return out;
}

std::optional<ReferenceResult> vertex_enumeration(const LpProblem& P) {
  P.validate();
  const int n = P.n, d = P.d;
  if (n > 16) throw InputError("vertex enumeration needs n <= 16");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, n);
  for (const auto& e : P.entries) A(e.row, e.col) += e.val;
  Eigen::Map<const Eigen::VectorXd> b(P.b.data(), d), c(P.c.data(), n);
  const double scale = 1.0 + b.lpNorm<Eigen::Infinity>() + A.lpNorm<Eigen::Infinity>();

  std::optional<ReferenceResult> best;
  std::vector<char> pick(n, 0);
  std::fill(pick.begin(), pick.begin() + d, 1);
  std::sort(pick.begin(), pick.end());  // lexicographically smallest permutation first
  do {
    std::vector<int> B, N;
    for (int j = 0; j < n; ++j) (pick[j] ? B : N).push_back(j);
    Eigen::MatrixXd AB(d, d);
    for (int k = 0; k < d; ++k) AB.col(k) = A.col(B[k]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(AB);
    if (d > 0 && lu.rank() < d) continue;
    const int nn = static_cast<int>(N.size());
    for (long mask = 0; mask < (1L << nn); ++mask) {
      Eigen::VectorXd x(n);
      Eigen::VectorXd rhs = b;
      for (int k = 0; k < nn; ++k) {
        x(N[k]) = (mask >> k) & 1 ? P.upper[N[k]] : P.lower[N[k]];
        rhs -= A.col(N[k]) * x(N[k]);
      }
      if (d > 0) {
        Eigen::VectorXd xb = lu.solve(rhs);
        bool ok = true;
        for (int k = 0; k < d && ok; ++k) {
          const int j = B[k];
          const double slack = 1e-9 * scale * (1.0 + std::abs(P.upper[j]) + std::abs(P.lower[j]));
          ok = xb(k) >= P.lower[j] - slack && xb(k) <= P.upper[j] + slack;
          x(j) = xb(k);
        }
        if (!ok) continue;
      }
      const double obj = c.dot(x);
      if (!best || obj < best->objective) {
        best = ReferenceResult{};
        best->x.assign(x.data(), x.data() + n);
        best->objective = obj;
        best->residual = (A * x - b).norm();
      }
    }
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace twlp
