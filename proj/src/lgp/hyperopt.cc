#include "lgpctrl/lgp/hyperopt.h"

#include <cmath>
#include <limits>

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include "lgpctrl/common/errors.h"
#include "lgpctrl/lgp/model.h"

namespace lgpctrl {
namespace lgp {

namespace {

constexpr double kPenalty = 1e300;

struct Context {
  const HyperObjective* objective{nullptr};
  const Hyperparams* shape{nullptr};
  int budget{0};
  int evaluations{0};
  bool exhausted{false};
  Eigen::VectorXd best_x;
  double best_f{std::numeric_limits<double>::infinity()};

  double Evaluate(const Eigen::VectorXd& x) {
    if (evaluations >= budget) {
      exhausted = true;
      return kPenalty;
    }
    ++evaluations;
    double f = kPenalty;
    try {
      f = (*objective)(Hyperparams::FromLog(x, *shape));
    } catch (const std::exception&) {
      f = kPenalty;
    }
    if (!std::isfinite(f)) f = kPenalty;
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
    return f;
  }
};

double GslObjective(const gsl_vector* v, void* params) {
  auto* ctx = static_cast<Context*>(params);
  Eigen::VectorXd x(v->size);
  for (size_t i = 0; i < v->size; ++i) x(i) = gsl_vector_get(v, i);
  return ctx->Evaluate(x);
}

}  // namespace

HyperoptResult OptimizeHyper(const HyperObjective& objective,
                             const Hyperparams& initial,
                             const HyperoptOptions& options) {
  if (options.budget < 1) throw InputError("OptimizeHyper: budget must be >= 1");
  initial.Validate();
  Context ctx;
  ctx.objective = &objective;
  ctx.shape = &initial;
  ctx.budget = options.budget;
  const Eigen::VectorXd x0 = initial.ToLog();
  HyperoptResult result;
  result.initial_objective = ctx.Evaluate(x0);
  const int dim = static_cast<int>(x0.size());

  gsl_multimin_function fn{&GslObjective, static_cast<size_t>(dim), &ctx};
  gsl_vector* x = gsl_vector_alloc(dim);
  gsl_vector* step = gsl_vector_alloc(dim);
  gsl_multimin_fminimizer* s =
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
  while (ctx.evaluations + dim + 1 <= options.budget) {
    for (int i = 0; i < dim; ++i) gsl_vector_set(x, i, ctx.best_x(i));
    gsl_vector_set_all(step, options.initial_step);
    gsl_multimin_fminimizer_set(s, &fn, x, step);
    if (ctx.exhausted) break;
    while (!ctx.exhausted) {
      if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
      if (gsl_multimin_fminimizer_size(s) < options.size_tolerance) break;
    }
    if (ctx.exhausted) break;
    ++result.restarts;
  }
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);

  result.best = Hyperparams::FromLog(ctx.best_x, initial);
  if (ctx.best_x == x0) result.best = initial;
  result.objective = ctx.best_f;
  result.evaluations = ctx.evaluations;
  return result;
}

double TorqueResidualObjective(
    const TrainingSet& train, const TrainingSet& validation,
    const Hyperparams& h,
    const std::shared_ptr<const dynamics::LagrangianModel>& prior) {
  const LgpModel model(train, h, prior);
  double sse = 0.0;
  for (const TrainingSet* set : {&train, &validation}) {
    for (int i = 0; i < set->size(); ++i) {
      sse += (model.PredictTau(set->input(i)) - set->y.row(i).transpose())
                 .squaredNorm();
    }
  }
  return sse;
}

double TorqueRmse(const dynamics::LagrangianModel& model,
                  const TrainingSet& data) {
  double sse = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const FullState x = data.input(i);
    const Eigen::VectorXd tau =
        dynamics::InverseDynamics(model.Components(x.q, x.dq), x.dq, x.ddq);
    sse += (tau - data.y.row(i).transpose()).squaredNorm();
  }
  return std::sqrt(sse / (data.size() * data.dof()));
}

}  // namespace lgp
}  // namespace lgpctrl
