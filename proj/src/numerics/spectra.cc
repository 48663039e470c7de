#include "lgpctrl/numerics/spectra.h"

#include <algorithm>
#include <cmath>

#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace numerics {

namespace {

void SortAscending(Eigen::VectorXd* v) {
  std::stable_sort(v->data(), v->data() + v->size());
}

}  // namespace

double MetricEigLower(double kappa, double mhat, double eps) {
  const double half_gap = 0.5 * (kappa - mhat);
  return 0.5 * (kappa + mhat) -
         std::sqrt(half_gap * half_gap + eps * eps * mhat * mhat);
}

Eigen::VectorXd MetricEigsClosed(double kappa, const Eigen::VectorXd& mhat_eigs,
                                 double eps) {
  if (!(kappa > 0.0)) throw InputError("MetricEigsClosed: kappa must be > 0");
  if (mhat_eigs.size() == 0 || !(mhat_eigs.minCoeff() > 0.0)) {
    throw InputError("MetricEigsClosed: inertia eigenvalues must be > 0");
  }
  const int n = static_cast<int>(mhat_eigs.size());
  Eigen::VectorXd out(2 * n);
  for (int i = 0; i < n; ++i) {
    const double m = mhat_eigs(i);
    const double root =
        std::sqrt(0.25 * (kappa - m) * (kappa - m) + eps * eps * m * m);
    out(2 * i) = 0.5 * (kappa + m) - root;
    out(2 * i + 1) = 0.5 * (kappa + m) + root;
  }
  SortAscending(&out);
  return out;
}

namespace {

void UpsilonPair(double a, double b, double gamma, double eps, double alpha,
                 double m, double* lo, double* hi) {
  const double upsilon = 0.5 * (a + gamma - (eps + alpha) * m);
  const double d1 = 0.5 * (gamma - a - (eps + alpha) * m);
  const double d2 = eps * alpha * m - 0.5 * b;
  const double root = std::sqrt(d1 * d1 + d2 * d2);
  *lo = upsilon - root;
  *hi = upsilon + root;
}

}  // namespace

double UpsilonEigLower(double a, double b, double gamma, double eps,
                       double alpha, double mhat) {
  double lo, hi;
  UpsilonPair(a, b, gamma, eps, alpha, mhat, &lo, &hi);
  return lo;
}

Eigen::VectorXd UpsilonEigsClosed(double a, double b, double gamma, double eps,
                                  double alpha,
                                  const Eigen::VectorXd& mhat_eigs) {
  if (!(eps > 0.0)) throw InputError("UpsilonEigsClosed: eps must be > 0");
  if (mhat_eigs.size() == 0 || !(mhat_eigs.minCoeff() > 0.0)) {
    throw InputError("UpsilonEigsClosed: inertia eigenvalues must be > 0");
  }
  const int n = static_cast<int>(mhat_eigs.size());
  Eigen::VectorXd out(2 * n);
  for (int i = 0; i < n; ++i) {
    UpsilonPair(a, b, gamma, eps, alpha, mhat_eigs(i), &out(2 * i),
                &out(2 * i + 1));
  }
  SortAscending(&out);
  return out;
}

}  // namespace numerics
}  // namespace lgpctrl
