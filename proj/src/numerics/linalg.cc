#include "lgpctrl/numerics/linalg.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace numerics {

SymMatrix::SymMatrix(const Eigen::MatrixXd& a) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw InputError("SymMatrix: matrix must be square and non-empty");
  }
  a_ = 0.5 * (a + a.transpose());
}

SymMatrix SymMatrix::Identity(int n) {
  return SymMatrix(Eigen::MatrixXd::Identity(n, n));
}

SymMatrix SymMatrix::Zero(int n) {
  return SymMatrix(Eigen::MatrixXd::Zero(n, n));
}

namespace {

double OffDiagonalNorm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  const int n = static_cast<int>(a.rows());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i != j) s += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(s);
}

SpectralDecomp Jacobi(const SymMatrix& sym, bool want_vectors) {
  Eigen::MatrixXd a = sym.matrix();
  if (!a.allFinite()) throw InputError("SymEig: non-finite entries");
  const int n = sym.dim();
  Eigen::MatrixXd v;
  if (want_vectors) v = Eigen::MatrixXd::Identity(n, n);

  const double scale = a.norm();
  const double tol = 1e-12 * scale;
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (OffDiagonalNorm(a) <= tol) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        if (want_vectors) {
          for (int k = 0; k < n; ++k) {
            const double vkp = v(k, p);
            const double vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&a](int i, int j) { return a(i, i) < a(j, j); });
  SpectralDecomp out;
  out.eigenvalues.resize(n);
  if (want_vectors) out.eigenvectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.eigenvalues(k) = a(order[k], order[k]);
    if (want_vectors) out.eigenvectors.col(k) = v.col(order[k]);
  }
  return out;
}

}  // namespace

SpectralDecomp SymEig(const SymMatrix& a) { return Jacobi(a, true); }

Eigen::VectorXd SymEigenvalues(const SymMatrix& a) {
  return Jacobi(a, false).eigenvalues;
}

double MinEigenvalue(const SymMatrix& a) { return SymEigenvalues(a)(0); }

double MaxEigenvalue(const SymMatrix& a) {
  const Eigen::VectorXd ev = SymEigenvalues(a);
  return ev(ev.size() - 1);
}

Eigen::MatrixXd CholeskyFactor::SolveLower(const Eigen::MatrixXd& b) const {
  return l_.triangularView<Eigen::Lower>().solve(b);
}

Eigen::MatrixXd CholeskyFactor::Solve(const Eigen::MatrixXd& b) const {
  const Eigen::MatrixXd y = SolveLower(b);
  return l_.transpose().triangularView<Eigen::Upper>().solve(y);
}

namespace {

// Returns the failing pivot index or -1 on success.
int TryCholesky(const Eigen::MatrixXd& a, double jitter, double pivot_floor,
                Eigen::MatrixXd* l) {
  const int n = static_cast<int>(a.rows());
  l->setZero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j) + jitter;
    for (int k = 0; k < j; ++k) d -= (*l)(j, k) * (*l)(j, k);
    if (!(d > pivot_floor) || !std::isfinite(d)) return j;
    const double ljj = std::sqrt(d);
    (*l)(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= (*l)(i, k) * (*l)(j, k);
      (*l)(i, j) = s / ljj;
    }
  }
  return -1;
}

}  // namespace

CholeskyFactor CholFactor(const SymMatrix& a, JitterPolicy policy) {
  const Eigen::MatrixXd& m = a.matrix();
  if (!m.allFinite()) throw InputError("CholFactor: non-finite entries");
  const int n = a.dim();
  const double max_diag = m.diagonal().maxCoeff();
  const double pivot_floor = 1e-13 * std::max(max_diag, 0.0);
  const double base = std::abs(m.trace()) / n;

  std::vector<double> ladder{0.0};
  if (policy == JitterPolicy::kLadder) {
    for (double rel : {1e-10, 1e-9, 1e-8, 1e-7}) ladder.push_back(rel * base);
  }
  Eigen::MatrixXd l;
  int pivot = -1;
  for (double jitter : ladder) {
    pivot = TryCholesky(m, jitter, pivot_floor, &l);
    if (pivot < 0) return CholeskyFactor(std::move(l), jitter);
  }
  throw DecompositionError(
      "CholFactor: matrix not positive definite at pivot " +
          std::to_string(pivot) + " after jitter " +
          std::to_string(ladder.back()),
      pivot);
}

CholSolveResult CholSolve(const SymMatrix& a, const Eigen::MatrixXd& b,
                          JitterPolicy policy) {
  if (b.rows() != a.dim()) throw InputError("CholSolve: dimension mismatch");
  const CholeskyFactor f = CholFactor(a, policy);
  return {f.Solve(b), f.jitter()};
}

}  // namespace numerics
}  // namespace lgpctrl
