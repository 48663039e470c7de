#pragma once

#include <Eigen/Dense>

namespace lgpctrl {
namespace numerics {

/// Eigenvalues of the block metric [[κI, εM̂], [εM̂, M̂]] from the eigenvalues
/// m̂ of M̂:  ½(κ + m̂ ± √((κ − m̂)² + (2εm̂)²)), ascending.
/// @throws InputError unless kappa > 0 and every m̂ > 0.
Eigen::VectorXd MetricEigsClosed(double kappa, const Eigen::VectorXd& mhat_eigs,
                                 double eps);

/// The smaller metric eigenvalue for a single m̂.
double MetricEigLower(double kappa, double mhat, double eps);

/// Eigenvalues of Υ = [[aI, (b/2)I − εαM̂], [(b/2)I − εαM̂, γI − (ε+α)M̂]]
/// from the eigenvalues m̂ of M̂, ascending.
/// @throws InputError unless eps > 0 and every m̂ > 0.
Eigen::VectorXd UpsilonEigsClosed(double a, double b, double gamma, double eps,
                                  double alpha, const Eigen::VectorXd& mhat_eigs);

/// The smaller Υ eigenvalue for a single m̂.
double UpsilonEigLower(double a, double b, double gamma, double eps,
                       double alpha, double mhat);

}  // namespace numerics
}  // namespace lgpctrl
