#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lgpctrl/certificates/theorem.h"
#include "lgpctrl/common/errors.h"
#include "lgpctrl/harness/config.h"
#include "lgpctrl/harness/experiment.h"
#include "lgpctrl/harness/export.h"
#include "lgpctrl/harness/monte_carlo.h"
#include "lgpctrl/lgp/serialization.h"

namespace lgpctrl {
namespace {

using harness::ExperimentConfig;
using nlohmann::json;

enum ExitCode {
  kOk = 0,
  kConfigFailure = 1,
  kNumericFailure = 2,
  kInfeasible = 3,
};

struct Options {
  std::string config;
  std::string out;
  std::string model;
  std::string controller;
  std::vector<std::string> overrides;
  std::uint64_t seed{0};
  int realizations{0};
  bool paper_scale{false};
  bool require_feasible{false};
  bool quiet{false};
};

class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  Options opt;
  ExperimentConfig cfg;
  harness::Plant plant;
  std::string out;

  void Say(const std::string& line) const {
    if (!opt.quiet) std::cout << line << "\n";
  }
  std::string Path(const std::string& name) const { return out + "/" + name; }
  void Write(const std::string& name, const std::string& text) const {
    harness::WriteTextFile(Path(name), text);
  }
  void WriteMeta(const std::string& stage, const json& extra) const {
    Write(stage + "_meta.json", harness::Metadata(cfg, stage, extra).dump(2) + "\n");
  }
};

std::string Fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, a);
  return buf;
}

Context MakeContext(const Options& opt) {
  std::vector<std::string> ov = opt.overrides;
  if (opt.seed != 0) ov.push_back("seed=" + std::to_string(opt.seed));
  if (opt.paper_scale) ov.push_back("paper_scale=true");
  if (opt.realizations > 0) {
    ov.push_back("montecarlo.realizations=" + std::to_string(opt.realizations));
    ov.push_back("montecarlo.paper_realizations=" + std::to_string(opt.realizations));
  }
  if (!opt.out.empty()) ov.push_back("output.dir=" + json(opt.out).dump());
  Context ctx{opt, harness::LoadConfig(opt.config, ov), {}, {}};
  ctx.out = ctx.cfg.output_dir;
  ctx.plant = harness::MakePlant(ctx.cfg);
  return ctx;
}

std::shared_ptr<const lgp::LgpModel> Fit(const Context& ctx) {
  const harness::Dataset data = harness::BuildTrainingSet(ctx.cfg, ctx.plant);
  const harness::FitResult fit = harness::FitModel(ctx.cfg, ctx.plant, data);
  ctx.Write("model.json", harness::ModelToText(*fit.model, ctx.cfg));
  ctx.Write("training.csv", lgp::TrainingSetToCsv(data.train));
  const char* unit = ctx.cfg.plant.type == harness::PlantType::kTwoLink ? "Nm" : "rad";
  ctx.WriteMeta("fit", {{"training_rows", data.train.size()},
                        {"evaluations", fit.hyper.evaluations},
                        {"prior_rmse", fit.prior_rmse},
                        {"model_rmse", fit.model_rmse},
                        {"rmse_unit", unit}});
  ctx.Say("fit: D=" + std::to_string(data.train.size()) + " evaluations=" +
          std::to_string(fit.hyper.evaluations) + " validation RMSE " +
          Fmt("%.4g", fit.model_rmse) + " " + unit + " (prior " +
          Fmt("%.4g", fit.prior_rmse) + ") -> " + ctx.Path("model.json"));
  return fit.model;
}

std::shared_ptr<const lgp::LgpModel> ModelFor(const Context& ctx) {
  if (ctx.opt.model.empty()) return Fit(ctx);
  auto model = harness::ModelFromText(harness::ReadTextFile(ctx.opt.model),
                                      ctx.plant, ctx.cfg);
  ctx.Say("model: loaded " + ctx.opt.model);
  return model;
}

bool NeedsModel(const std::vector<std::string>& roster) {
  for (const std::string& name : roster) {
    if (harness::UsesLearnedModel(harness::CanonicalControllerName(name))) return true;
  }
  return false;
}

std::vector<std::string> Roster(const Context& ctx) {
  if (ctx.opt.controller.empty()) return ctx.cfg.controllers.roster;
  return {harness::CanonicalControllerName(ctx.opt.controller)};
}

void Infeasible(const Context& ctx, const std::string& what) {
  if (ctx.opt.require_feasible) throw InfeasibleError(what);
  ctx.Say("certificate: " + what);
}

int CmdFit(Context& ctx) {
  Fit(ctx);
  return kOk;
}

int CmdSimulate(Context& ctx) {
  const std::vector<std::string> roster = Roster(ctx);
  ctx.cfg.controllers.roster = roster;
  const auto model = NeedsModel(roster) ? ModelFor(ctx) : nullptr;
  const harness::BenchmarkResult bench = harness::RunBenchmark(ctx.cfg, ctx.plant, model);
  const control::Reference ref = harness::MakeReference(ctx.cfg);
  json certs = json::object();
  bool fatal = false;
  for (size_t i = 0; i < bench.runs.size(); ++i) {
    const harness::Run& run = bench.runs[i];
    const harness::MetricsRow& row = bench.rows[i];
    const auto spec = harness::MakeControllerSpec(run.name, ctx.cfg, ctx.plant, model);
    const harness::CertificateSetup setup = harness::PrepareCertificate(ctx.cfg, spec, ref);
    std::unique_ptr<certificates::CertificateTrace> trace;
    std::string cert_line = "certificate infeasible";
    if (setup.optimum.feasible && !run.traj.diverged) {
      trace = std::make_unique<certificates::CertificateTrace>(
          harness::CertifyRun(ctx.cfg, spec, setup, run));
      cert_line = "certificate violations=" + std::to_string(trace->violations()) +
                  " unclaimed=" + std::to_string(trace->region_misses());
      certs[run.name] = {{"violations", trace->violations()},
                         {"unclaimed", trace->region_misses()}};
    } else if (!setup.optimum.feasible) {
      Infeasible(ctx, run.name + ": no feasible certificate parameters");
    }
    ctx.Write("trajectory_" + run.name + ".csv", harness::TrajectoryToCsv(run.traj, trace.get()));
    ctx.Write("gains_" + run.name + ".csv", harness::GainsToCsv(run));
    ctx.Say("simulate " + run.name + ": " +
            (row.diverged ? std::string("diverged")
                          : "x_L2=" + Fmt("%.4g", row.x_l2) + " e_max=" +
                                Fmt("%.4g", row.e_max) + " tau_L2=" +
                                Fmt("%.4g", row.tau_l2)) +
            ", " + cert_line);
    fatal = fatal || (row.diverged && !ctx.opt.controller.empty());
  }
  ctx.Write("metrics.csv", harness::MetricsToCsv(bench.rows));
  ctx.WriteMeta("simulate", {{"roster", roster}, {"certificates", certs}});
  if (fatal) throw NumericFailure("closed loop diverged");
  return kOk;
}

int CmdCertify(Context& ctx) {
  const std::string name = harness::CanonicalControllerName(
      ctx.opt.controller.empty() ? "lgp_nat_pdp" : ctx.opt.controller);
  const auto model = harness::UsesLearnedModel(name) ? ModelFor(ctx) : nullptr;
  harness::CertificationStudy study;
  try {
    study = harness::RunCertificationStudy(ctx.cfg, ctx.plant, model, name);
  } catch (const InfeasibleError& e) {
    Infeasible(ctx, e.what());
    return kOk;
  }
  std::string summary = "run,violations,unclaimed,samples,final_rho,final_err\n";
  for (size_t i = 0; i < study.runs.size(); ++i) {
    const certificates::CertificateTrace& tr = study.traces[i];
    ctx.Write("certify_run" + std::to_string(i) + ".csv",
              harness::TrajectoryToCsv(study.runs[i].traj, &tr));
    summary += std::to_string(i) + "," + std::to_string(tr.violations()) + "," +
               std::to_string(tr.region_misses()) + "," + std::to_string(tr.size()) +
               "," + CsvLine(std::vector<double>{tr.rho.back(), tr.err_norm.back()}) +
               "\n";
  }
  ctx.Write("certify_summary.csv", summary);
  const certificates::CertificateParams& p = study.setup.optimum.params;
  ctx.WriteMeta("certify", {{"controller", name},
                            {"eps", p.eps},
                            {"theta", p.theta},
                            {"alpha_lb", p.alpha_lb},
                            {"kappa", p.kappa},
                            {"phi", p.phi},
                            {"violations", study.violations()},
                            {"unclaimed", study.region_misses()}});
  ctx.Say("certify " + name + ": " + std::to_string(study.runs.size()) + " runs, " +
          std::to_string(study.violations()) + " envelope violations, " +
          std::to_string(study.region_misses()) + " unclaimed samples");
  return kOk;
}

int CmdMonteCarlo(Context& ctx) {
  const auto model = NeedsModel(ctx.cfg.controllers.roster) ? ModelFor(ctx) : nullptr;
  const harness::MonteCarloResult mc = harness::RunMonteCarlo(ctx.cfg, ctx.plant, model);
  ctx.Write("montecarlo.csv", harness::MonteCarloToCsv(mc));
  json onsets = json::object();
  for (const std::string& raw : ctx.cfg.controllers.roster) {
    const std::string name = harness::CanonicalControllerName(raw);
    const double onset = mc.onset(name);
    onsets[name] = {{"onset", std::isnan(onset) ? json(nullptr) : json(onset)},
                    {"divergences", mc.total_divergences(name)}};
    ctx.Say("montecarlo " + name + ": divergences=" +
            std::to_string(mc.total_divergences(name)) + " onset=" +
            (std::isnan(onset) ? std::string("none") : Fmt("%.2f rad/s", onset)));
  }
  ctx.WriteMeta("montecarlo", {{"realizations", ctx.cfg.realizations()}, {"controllers", onsets}});
  return kOk;
}

int CmdReport(Context& ctx) {
  const std::string name = harness::CanonicalControllerName(
      ctx.opt.controller.empty() ? "lgp_nat_pdp" : ctx.opt.controller);
  const auto model = harness::UsesLearnedModel(name) ? ModelFor(ctx) : nullptr;
  const auto spec = harness::MakeControllerSpec(name, ctx.cfg, ctx.plant, model);
  const harness::CertificateSetup setup =
      harness::PrepareCertificate(ctx.cfg, spec, harness::MakeReference(ctx.cfg));
  const certificates::WorstCaseBounds& b = setup.bounds;
  const certificates::OptimizeResult& o = setup.optimum;
  json doc;
  doc["controller"] = name;
  doc["bounds"] = {{"m_lo", b.m_lo}, {"m_hi", b.m_hi}, {"d_hat_lo", b.d_hat_lo},
                   {"kp_lo", b.kp_lo}, {"kd_lo", b.kd_lo}, {"delta", b.delta},
                   {"c0", b.c0},     {"c1", b.c1}};
  doc["optimum"] = {{"feasible", o.feasible},
                    {"eps", o.params.eps},
                    {"theta", o.params.theta},
                    {"alpha_lb", o.params.alpha_lb},
                    {"kappa", o.params.kappa},
                    {"phi", o.params.phi},
                    {"rho_worst", o.rho_worst},
                    {"upsilon_min", o.upsilon_min},
                    {"binding", o.binding}};
  std::string text = "optimized tuple: " + std::string(o.feasible ? "feasible" : "infeasible") +
                     "\n" +
                     certificates::CheckFeasibility(b, o.params.eps, o.params.theta,
                                                    o.params.alpha_lb)
                         .ToString();
  const std::vector<double>& a = ctx.cfg.certificate.anchor;
  if (a.size() == 3) {
    const certificates::FeasibilityReport rep =
        certificates::CheckFeasibility(b, a[0], a[1], a[2]);
    const certificates::KappaPhi kp = certificates::ComputeKappaPhi(b, a[0], a[1], a[2]);
    doc["anchor"] = {{"eps", a[0]},     {"theta", a[1]}, {"alpha_lb", a[2]},
                     {"feasible", rep.ok()}, {"violated", rep.violated()},
                     {"kappa", kp.kappa}, {"phi", kp.phi}};
    text += "\nanchor tuple (" + Fmt("%.4f", a[0]) + ", " + Fmt("%.4f", a[1]) + ", " +
            Fmt("%.4f", a[2]) + "): " + (rep.ok() ? "feasible" : "infeasible") + "\n" +
            rep.ToString();
    ctx.Say("report anchor: " + std::string(rep.ok() ? "feasible" : "infeasible") +
            ", " + std::to_string(rep.violated().size()) + " violated constraint(s)");
  }
  ctx.Write("report.json", doc.dump(2) + "\n");
  ctx.Write("report.txt", text);
  ctx.WriteMeta("report", {{"controller", name}});
  ctx.Say("report " + name + ": optimized tuple " + (o.feasible ? "feasible" : "infeasible") +
          " eps=" + Fmt("%.4g", o.params.eps) + " theta=" + Fmt("%.4g", o.params.theta) +
          " alpha_lb=" + Fmt("%.4g", o.params.alpha_lb) + " rho_worst=" +
          Fmt("%.4g", o.rho_worst));
  if (!o.feasible) Infeasible(ctx, name + ": no feasible certificate parameters");
  return kOk;
}

int Run(int argc, char** argv) {
  CLI::App app{
      "lgpctrl: Lagrangian-GP learning, structure-preserving tracking control and "
      "stability certificates.\n\nExit codes: 0 success, 1 configuration or input "
      "error, 2 numeric failure, 3 infeasible certificate with --require-feasible."};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Config file (JSON, // comments allowed)");
    sub->add_option("--out", opt.out, "Output directory (overrides output.dir)");
    sub->add_option("--seed", opt.seed, "Seed (overrides seed)");
    sub->add_option("--controller", opt.controller,
                    "Controller: pdp, lgp-pdp, nat-pdp, lgp-nat-pdp, var-nat-pdp");
    sub->add_option("--realizations", opt.realizations,
                    "Monte Carlo realizations per frequency")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--paper-scale", opt.paper_scale,
                  "Full-scale FEM resolution (100 elements) and Monte Carlo count");
    sub->add_flag("--require-feasible", opt.require_feasible,
                  "Exit with 3 if no feasible certificate exists");
    sub->add_flag("--quiet", opt.quiet, "Suppress summary lines");
    sub->add_option("--set", opt.overrides, "Config override key.path=value (repeatable)");
    sub->add_option("--model", opt.model, "Fitted model document to reuse instead of fitting");
  };
  struct Verb {
    const char* name;
    const char* help;
    int (*fn)(Context&);
  };
  const Verb verbs[] = {
      {"fit", "Build the training set and fit the L-GP model", CmdFit},
      {"simulate", "Run the tracking benchmark and certify each run", CmdSimulate},
      {"certify", "Random initial-condition study of the certificate envelope", CmdCertify},
      {"montecarlo", "Frequency sweep with divergence counts", CmdMonteCarlo},
      {"report", "Certificate parameters, bounds and the anchor-tuple check", CmdReport},
  };
  std::vector<CLI::App*> subs;
  for (const Verb& v : verbs) {
    subs.push_back(app.add_subcommand(v.name, v.help));
    add_common(subs.back());
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }
  try {
    Context ctx = MakeContext(opt);
    for (size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) return verbs[i].fn(ctx);
    }
    return kConfigFailure;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumericFailure;
  }
}

}  // namespace
}  // namespace lgpctrl

int main(int argc, char** argv) { return lgpctrl::Run(argc, argv); }
