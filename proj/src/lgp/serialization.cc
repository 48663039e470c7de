#include "lgpctrl/lgp/serialization.h"

#include <cstdio>
#include <cstdlib>

#include "lgpctrl/common/csv.h"
#include "lgpctrl/common/errors.h"

namespace lgpctrl {
namespace lgp {

using nlohmann::json;

namespace {

json VecToJson(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd VecFromJson(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
}

json MatToJson(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) rows.push_back(VecToJson(m.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd MatFromJson(const json& j, int cols) {
  Eigen::MatrixXd m(static_cast<int>(j.size()), cols);
  for (int i = 0; i < m.rows(); ++i) {
    const Eigen::VectorXd r = VecFromJson(j.at(i));
    if (r.size() != cols) throw InputError("model document: ragged matrix");
    m.row(i) = r.transpose();
  }
  return m;
}

std::string HexFloat(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

}  // namespace

json HyperparamsToJson(const Hyperparams& h) {
  json j;
  j["kin_diag"] = VecToJson(h.kin_diag);
  j["kin_offdiag"] = VecToJson(h.kin_offdiag);
  j["kin_length"] = h.kin_length;
  j["grav_amp"] = h.grav_amp;
  j["grav_length"] = VecToJson(h.grav_length);
  j["elastic"] = h.elastic;
  if (h.elastic) {
    j["el_diag"] = VecToJson(h.el_diag);
    j["el_offdiag"] = VecToJson(h.el_offdiag);
    j["el_length"] = h.el_length;
  }
  j["diss_amp"] = VecToJson(h.diss_amp);
  j["diss_length"] = VecToJson(h.diss_length);
  j["symmetric"] = h.symmetric;
  return j;
}

Hyperparams HyperparamsFromJson(const json& j) {
  try {
    Hyperparams h;
    h.kin_diag = VecFromJson(j.at("kin_diag"));
    h.kin_offdiag = VecFromJson(j.at("kin_offdiag"));
    h.kin_length = j.at("kin_length").get<double>();
    h.grav_amp = j.at("grav_amp").get<double>();
    h.grav_length = VecFromJson(j.at("grav_length"));
    h.elastic = j.at("elastic").get<bool>();
    if (h.elastic) {
      h.el_diag = VecFromJson(j.at("el_diag"));
      h.el_offdiag = VecFromJson(j.at("el_offdiag"));
      h.el_length = j.at("el_length").get<double>();
    }
    h.diss_amp = VecFromJson(j.at("diss_amp"));
    h.diss_length = VecFromJson(j.at("diss_length"));
    h.symmetric = j.at("symmetric").get<bool>();
    h.Validate();
    return h;
  } catch (const json::exception& e) {
    throw InputError(std::string("hyperparameters: ") + e.what());
  }
}

std::string SerializeModel(const LgpModel& model, const json& prior) {
  const TrainingSet& ts = model.training_set();
  json j;
  j["format"] = "lgpctrl-model";
  j["version"] = kModelFormatVersion;
  j["dof"] = ts.dof();
  j["hyperparams"] = HyperparamsToJson(model.hyperparams());
  j["training"] = {{"q", MatToJson(ts.q)},
                   {"dq", MatToJson(ts.dq)},
                   {"ddq", MatToJson(ts.ddq)},
                   {"y", MatToJson(ts.y)},
                   {"torque_noise_std", ts.torque_noise_std},
                   {"accel_noise_std", ts.accel_noise_std}};
  json w = json::array();
  for (int i = 0; i < model.weights().size(); ++i) {
    w.push_back(HexFloat(model.weights()(i)));
  }
  j["weights"] = w;
  j["prior"] = prior;
  return j.dump(2) + "\n";
}

ModelDocument ParseModel(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "lgpctrl-model") {
      throw InputError("model document: unknown format");
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw InputError("model document: unsupported version");
    }
    const int n = j.at("dof").get<int>();
    ModelDocument doc;
    const json& t = j.at("training");
    doc.training.q = MatFromJson(t.at("q"), n);
    doc.training.dq = MatFromJson(t.at("dq"), n);
    doc.training.ddq = MatFromJson(t.at("ddq"), n);
    doc.training.y = MatFromJson(t.at("y"), n);
    doc.training.torque_noise_std = t.at("torque_noise_std").get<double>();
    doc.training.accel_noise_std = t.at("accel_noise_std").get<double>();
    doc.training.Validate();
    doc.hyperparams = HyperparamsFromJson(j.at("hyperparams"));
    const json& w = j.at("weights");
    doc.weights.resize(static_cast<int>(w.size()));
    for (size_t i = 0; i < w.size(); ++i) {
      const std::string s = w[i].get<std::string>();
      char* end = nullptr;
      doc.weights(static_cast<int>(i)) = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size()) {
        throw InputError("model document: bad weight '" + s + "'");
      }
    }
    doc.prior = j.value("prior", json());
    return doc;
  } catch (const json::exception& e) {
    throw InputError(std::string("model document: ") + e.what());
  }
}

std::string TrainingSetToCsv(const TrainingSet& ts) {
  const int n = ts.dof();
  std::vector<std::string> header;
  for (const char* p : {"q_", "dq_", "ddq_", "y_"}) {
    for (int i = 1; i <= n; ++i) header.push_back(p + std::to_string(i));
  }
  std::string out = CsvLine(header) + "\n";
  for (int r = 0; r < ts.size(); ++r) {
    std::vector<double> row;
    for (const Eigen::MatrixXd* m : {&ts.q, &ts.dq, &ts.ddq, &ts.y}) {
      for (int i = 0; i < n; ++i) row.push_back((*m)(r, i));
    }
    out += CsvLine(row) + "\n";
  }
  return out;
}

TrainingSet TrainingSetFromCsv(const std::string& text) {
  const CsvTable t = ParseCsv(text);
  if (t.header.size() % 4 != 0 || t.header.empty()) {
    throw InputError("training CSV: column count must be 4N");
  }
  const int n = static_cast<int>(t.header.size() / 4);
  const char* prefixes[] = {"q_", "dq_", "ddq_", "y_"};
  for (int b = 0; b < 4; ++b) {
    for (int i = 0; i < n; ++i) {
      if (t.header[b * n + i] != prefixes[b] + std::to_string(i + 1)) {
        throw InputError("training CSV: unexpected column '" +
                         t.header[b * n + i] + "'");
      }
    }
  }
  const int d = static_cast<int>(t.rows.size());
  TrainingSet ts;
  Eigen::MatrixXd* mats[] = {&ts.q, &ts.dq, &ts.ddq, &ts.y};
  for (auto* m : mats) m->resize(d, n);
  for (int r = 0; r < d; ++r) {
    for (int b = 0; b < 4; ++b) {
      for (int i = 0; i < n; ++i) (*mats[b])(r, i) = t.rows[r][b * n + i];
    }
  }
  return ts;
}

}  // namespace lgp
}  // namespace lgpctrl
