#pragma once

#include <Eigen/Dense>

namespace lgpctrl {
namespace numerics {

/// A dense real symmetric matrix. The input is symmetrized on construction as
/// ½(A + Aᵀ), so entries(i,j) == entries(j,i) holds bitwise.
class SymMatrix {
 public:
  SymMatrix() = default;

  /// @throws InputError if `a` is empty or not square.
  explicit SymMatrix(const Eigen::MatrixXd& a);

  static SymMatrix Identity(int n);
  static SymMatrix Zero(int n);

  int dim() const { return static_cast<int>(a_.rows()); }
  const Eigen::MatrixXd& matrix() const { return a_; }
  double operator()(int i, int j) const { return a_(i, j); }

 private:
  Eigen::MatrixXd a_;
};

/// Eigenvalues in ascending order with matching orthonormal eigenvectors as
/// columns.
struct SpectralDecomp {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

/// Full spectrum by cyclic Jacobi rotations. Sweeps stop once the off-diagonal
/// Frobenius norm drops below 1e-12·‖A‖_F. Equal eigenvalues keep the order
/// of their diagonal positions.
/// @throws InputError on non-finite entries.
SpectralDecomp SymEig(const SymMatrix& a);

/// Eigenvalues only (same algorithm as SymEig).
Eigen::VectorXd SymEigenvalues(const SymMatrix& a);

double MinEigenvalue(const SymMatrix& a);
double MaxEigenvalue(const SymMatrix& a);

enum class JitterPolicy {
  kNone,
  /// Retry with 1e-10·trace(A)/dim·I, then 1e-9, 1e-8 and 1e-7.
  kLadder,
};

/// Lower Cholesky factor of A + jitter·I.
class CholeskyFactor {
 public:
  CholeskyFactor(Eigen::MatrixXd lower, double jitter)
      : l_(std::move(lower)), jitter_(jitter) {}

  const Eigen::MatrixXd& lower() const { return l_; }
  double jitter() const { return jitter_; }
  int dim() const { return static_cast<int>(l_.rows()); }

  /// Solves (A + jitter·I) X = B.
  Eigen::MatrixXd Solve(const Eigen::MatrixXd& b) const;
  /// Solves L Y = B.
  Eigen::MatrixXd SolveLower(const Eigen::MatrixXd& b) const;

 private:
  Eigen::MatrixXd l_;
  double jitter_{0.0};
};

/// @throws DecompositionError naming the failing pivot once the policy is
/// exhausted. A pivot counts as failed when it is not above
/// 1e-13·max(diag(A)).
CholeskyFactor CholFactor(const SymMatrix& a, JitterPolicy policy);

struct CholSolveResult {
  Eigen::MatrixXd x;
  double jitter{0.0};
};

CholSolveResult CholSolve(const SymMatrix& a, const Eigen::MatrixXd& b,
                          JitterPolicy policy);

}  // namespace numerics
}  // namespace lgpctrl
