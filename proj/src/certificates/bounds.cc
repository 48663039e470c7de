#include "lgpctrl/certificates/bounds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "lgpctrl/common/errors.h"
#include "lgpctrl/numerics/linalg.h"

namespace lgpctrl {
namespace certificates {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Structure StructureOf(control::ControllerKind kind) {
  return kind == control::ControllerKind::kPdp ? Structure::kCompensating
                                               : Structure::kNatural;
}

void WorstCaseBounds::Validate() const {
  const bool finite = std::isfinite(m_lo) && std::isfinite(m_hi) &&
                      std::isfinite(d_hat_lo) && std::isfinite(kd_lo) &&
                      std::isfinite(kp_lo) && std::isfinite(delta);
  if (!finite || !(m_lo > 0.0) || m_hi < m_lo) {
    throw InputError("WorstCaseBounds: need 0 < m_lo <= m_hi");
  }
  if (!(d_lo() > 0.0)) throw InputError("WorstCaseBounds: need d_lo > 0");
  if (!(kp_lo > 0.0)) throw InputError("WorstCaseBounds: need kp_lo > 0");
  if (delta < 0.0) throw InputError("WorstCaseBounds: need delta >= 0");
}

GainFloors FloorsOf(const control::ControllerSpec& spec) {
  GainFloors f;
  f.kp_lo = numerics::MinEigenvalue(numerics::SymMatrix(spec.kp));
  f.kd_lo = numerics::MinEigenvalue(numerics::SymMatrix(spec.kd));
  if (spec.kind == control::ControllerKind::kVarNatPdp && spec.adaptation) {
    const double k = spec.adaptation->LowerBound();
    f.kp_lo += k;
    f.kd_lo += k;
  }
  return f;
}

WorstCaseBounds SampleBounds(const dynamics::LagrangianModel& model,
                             const control::Reference& ref, Structure structure,
                             const GainFloors& floors, double delta,
                             const SamplingOptions& o) {
  if (o.samples < 1 || !(o.t_end >= 0.0) || o.q_margin < 0.0 ||
      o.dq_margin < 0.0) {
    throw InputError("SampleBounds: invalid sampling options");
  }
  const int n = model.dof();
  if (ref.dof() != n) throw InputError("SampleBounds: reference size mismatch");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> time(0.0, o.t_end);

  WorstCaseBounds b;
  b.m_lo = std::numeric_limits<double>::infinity();
  b.m_hi = 0.0;
  b.d_hat_lo = structure == Structure::kNatural
                   ? std::numeric_limits<double>::infinity()
                   : 0.0;
  double dq_ref_max = 0.0;
  std::vector<double> q_norm, ratio;
  for (int k = 0; k < o.samples; ++k) {
    const double t = time(rng);
    VectorXd q = ref.q(t), dq = ref.dq(t);
    dq_ref_max = std::max(dq_ref_max, dq.cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i) {
      q(i) += o.q_margin * unit(rng);
      dq(i) += o.dq_margin * unit(rng);
    }
    const VectorXd ev =
        numerics::SymEigenvalues(numerics::SymMatrix(model.MassMatrix(q)));
    b.m_lo = std::min(b.m_lo, ev(0));
    b.m_hi = std::max(b.m_hi, ev(n - 1));
    const dynamics::ElComponents c = model.Components(q, dq);
    if (dq.norm() > 0.0) {
      q_norm.push_back(q.norm());
      ratio.push_back(c.C.operatorNorm() / dq.norm());
    }
  }
  if (structure == Structure::kNatural) {
    // Velocity errors span the reference speed plus the margin.
    const double v = dq_ref_max + o.dq_margin;
    for (int k = 0; k < o.samples; ++k) {
      VectorXd de(n);
      for (int i = 0; i < n; ++i) de(i) = v * unit(rng);
      b.d_hat_lo = std::min(b.d_hat_lo, numerics::MinEigenvalue(numerics::SymMatrix(
                                            model.Damping(de))));
    }
  }
  if (!(b.m_lo > 0.0)) {
    throw InputError("SampleBounds: sampled inertia is not positive definite");
  }

  // Smallest c₀ + c₁·mean‖q‖ over a slope grid with c₀ + c₁‖q‖ above every
  // sampled ratio.
  double mean_q = 0.0, slope_max = 0.0;
  for (size_t i = 0; i < ratio.size(); ++i) {
    mean_q += q_norm[i] / ratio.size();
    if (q_norm[i] > 0.0) slope_max = std::max(slope_max, ratio[i] / q_norm[i]);
  }
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 64 && !ratio.empty(); ++j) {
    const double c1 = slope_max * j / 64.0;
    double c0 = 0.0;
    for (size_t i = 0; i < ratio.size(); ++i) {
      c0 = std::max(c0, ratio[i] - c1 * q_norm[i]);
    }
    if (c0 + c1 * mean_q < best) {
      best = c0 + c1 * mean_q;
      b.c0 = c0;
      b.c1 = c1;
    }
  }

  b.kp_lo = floors.kp_lo;
  b.kd_lo = floors.kd_lo;
  b.delta = delta;
  return b;
}

}  // namespace certificates
}  // namespace lgpctrl
