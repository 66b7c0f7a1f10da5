// JSON scenario documents: parsing with strict key checking, dotted-key
// overrides, and serialization of the reference cases.
#pragma once

#include "geoctl/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace geoctl {

/// Malformed or inconsistent configuration document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace config_detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

inline Vec3 vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected an array of 3 numbers");
  return {number(j[0], where), number(j[1], where), number(j[2], where)};
}

inline Mat3 mat3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected a 3x3 array");
  Mat3 m;
  for (int i = 0; i < 3; ++i) m.row(i) = vec3(j[i], where).transpose();
  return m;
}

inline json to_json(const Mat3& m) {
  json a = json::array();
  for (int i = 0; i < 3; ++i) a.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return a;
}

inline json to_json(const Vec3& v) { return {v(0), v(1), v(2)}; }

inline CaseId case_from_string(const std::string& s) {
  if (s == "adaptive_no_dist") return CaseId::adaptive_no_dist;
  if (s == "adaptive_with_dist") return CaseId::adaptive_with_dist;
  if (s == "robust_with_dist") return CaseId::robust_with_dist;
  if (s == "custom") return CaseId::custom;
  throw ConfigError("case: unknown case '" + s + "'");
}

// Uniformly distributed rotation from a seeded generator (unit quaternion
// from four normals).
inline Rotation random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return project_to_so3(q.toRotationMatrix());
}

}  // namespace config_detail

/// Parses a scenario document. Unknown keys are rejected at every level.
inline Scenario scenario_from_json(const nlohmann::json& doc) {
  using namespace config_detail;
  check_keys(doc, "scenario",
             {"case", "controller", "duration", "step", "output_every", "settle", "seed",
              "force_gains", "integrator", "gains", "robust", "J_true", "J_bar0", "R0", "Omega0",
              "command", "disturbance"});
  Scenario s;
  try {
    s.case_id = case_from_string(doc.at("case").get<std::string>());
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("scenario: 'case' is required and must be a string");
  }

  switch (s.case_id) {
    case CaseId::robust_with_dist: s.controller = ControllerKind::robust; break;
    case CaseId::custom:
      if (!doc.contains("controller")) throw ConfigError("scenario: custom case needs 'controller'");
      break;
    default: s.controller = ControllerKind::adaptive; break;
  }
  if (doc.contains("controller")) {
    const std::string c = doc["controller"].is_string() ? doc["controller"].get<std::string>() : "";
    ControllerKind k;
    if (c == "adaptive") k = ControllerKind::adaptive;
    else if (c == "robust") k = ControllerKind::robust;
    else throw ConfigError("controller: expected 'adaptive' or 'robust'");
    if (s.case_id != CaseId::custom && k != s.controller) {
      throw ConfigError("controller: '" + c + "' contradicts case '" + to_string(s.case_id) + "'");
    }
    s.controller = k;
  }

  if (doc.contains("duration")) s.duration = number(doc["duration"], "duration");
  if (doc.contains("step")) s.integrator.step_size = number(doc["step"], "step");
  if (doc.contains("output_every")) {
    if (!doc["output_every"].is_number_integer()) throw ConfigError("output_every: expected an integer");
    s.output_every = doc["output_every"].get<int>();
  }
  if (doc.contains("settle")) s.settle = number(doc["settle"], "settle");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() || doc["seed"].get<std::int64_t>() < 0) {
      throw ConfigError("seed: expected a nonnegative integer");
    }
    s.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("force_gains")) {
    if (!doc["force_gains"].is_boolean()) throw ConfigError("force_gains: expected a boolean");
    s.gains.override_c_condition = doc["force_gains"].get<bool>();
  }

  if (doc.contains("integrator")) {
    const auto& j = doc["integrator"];
    check_keys(j, "integrator", {"method", "newton_tol", "newton_max_iter"});
    if (j.contains("method")) {
      try {
        s.integrator.method = integrator_method_from_string(j["method"].get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("integrator.method: ") + e.what());
      }
    }
    if (j.contains("newton_tol")) s.integrator.newton_tol = number(j["newton_tol"], "integrator.newton_tol");
    if (j.contains("newton_max_iter")) {
      if (!j["newton_max_iter"].is_number_integer()) throw ConfigError("integrator.newton_max_iter: expected an integer");
      s.integrator.newton_max_iter = j["newton_max_iter"].get<int>();
    }
  }

  if (doc.contains("J_true")) {
    const auto& j = doc["J_true"];
    if (j.is_string()) {
      if (j.get<std::string>() != "paper") throw ConfigError("J_true: expected a 3x3 array or \"paper\"");
    } else {
      try {
        s.J_true = InertiaMatrix(mat3(j, "J_true"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("J_true: ") + e.what());
      }
    }
  }
  if (doc.contains("J_bar0")) s.J_bar0 = mat3(doc["J_bar0"], "J_bar0");
  if (doc.contains("R0")) {
    const auto& j = doc["R0"];
    if (j.is_string()) {
      if (j.get<std::string>() != "random") throw ConfigError("R0: expected a 3x3 array or \"random\"");
      s.R0 = random_rotation(s.seed);
    } else {
      try {
        s.R0 = Rotation(mat3(j, "R0"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("R0: ") + e.what());
      }
    }
  }
  if (doc.contains("Omega0")) s.Omega0 = vec3(doc["Omega0"], "Omega0");

  bool have_c = false;
  if (doc.contains("gains")) {
    const auto& j = doc["gains"];
    check_keys(j, "gains", {"k_R", "k_Omega", "k_J", "c", "G", "psi_bar"});
    if (j.contains("k_R")) s.gains.k_R = number(j["k_R"], "gains.k_R");
    if (j.contains("k_Omega")) s.gains.k_Omega = number(j["k_Omega"], "gains.k_Omega");
    if (j.contains("k_J")) s.gains.k_J = number(j["k_J"], "gains.k_J");
    if (j.contains("c")) {
      s.gains.c = number(j["c"], "gains.c");
      have_c = true;
    }
    if (j.contains("G")) {
      const Vec3 g = vec3(j["G"], "gains.G");
      try {
        s.gains.G = GainMatrix(g(0), g(1), g(2));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("gains.G: ") + e.what());
      }
    }
    if (j.contains("psi_bar")) s.psi_bar = number(j["psi_bar"], "gains.psi_bar");
  }
  if (!have_c) {
    // Default c: 99% of the smaller of c_max and the W2 determinant limit.
    s.gains.c = 0.99 * std::min(c_max(s.gains.k_R, s.gains.k_Omega, s.gains.G,
                                      s.J_true.lambda_min(), s.J_true.lambda_max()),
                                c_w2_limit(s.gains.k_R, s.gains.k_Omega, s.gains.G,
                                           s.J_true.lambda_max()));
  }

  if (doc.contains("robust")) {
    const auto& j = doc["robust"];
    check_keys(j, "robust", {"sigma", "epsilon", "delta"});
    RobustParams rp;
    if (j.contains("sigma")) rp.sigma = number(j["sigma"], "robust.sigma");
    if (j.contains("epsilon")) rp.epsilon = number(j["epsilon"], "robust.epsilon");
    if (j.contains("delta")) rp.delta_bound = number(j["delta"], "robust.delta");
    s.robust = rp;
  }

  if (doc.contains("command")) {
    const auto& j = doc["command"];
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
      throw ConfigError("command: expected an object with a string 'type'");
    }
    const std::string type = j["type"].get<std::string>();
    if (type == "euler321") {
      check_keys(j, "command", {"type", "amplitude_phi", "amplitude_theta", "frequency", "psi"});
      EulerCommand c;
      if (j.contains("amplitude_phi")) c.amplitude_phi = number(j["amplitude_phi"], "command.amplitude_phi");
      if (j.contains("amplitude_theta")) c.amplitude_theta = number(j["amplitude_theta"], "command.amplitude_theta");
      if (j.contains("frequency")) c.frequency = number(j["frequency"], "command.frequency");
      if (j.contains("psi")) c.psi_const = number(j["psi"], "command.psi");
      s.command = c;
    } else if (type == "constant") {
      check_keys(j, "command", {"type", "R_d"});
      try {
        s.command = ConstantCommand{Rotation(mat3(j.at("R_d"), "command.R_d"))};
      } catch (const nlohmann::json::exception&) {
        throw ConfigError("command: constant command needs 'R_d'");
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("command.R_d: ") + e.what());
      }
    } else {
      throw ConfigError("command: unknown type '" + type + "'");
    }
  }

  if (doc.contains("disturbance")) {
    const auto& j = doc["disturbance"];
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
      throw ConfigError("disturbance: expected an object with a string 'type'");
    }
    const std::string type = j["type"].get<std::string>();
    if (type == "none") {
      check_keys(j, "disturbance", {"type"});
      s.disturbance = NoDisturbance{};
    } else if (type == "paper") {
      check_keys(j, "disturbance", {"type", "amplitude"});
      PaperDisturbance d;
      if (j.contains("amplitude")) d.amplitude = number(j["amplitude"], "disturbance.amplitude");
      s.disturbance = d;
    } else if (type == "constant") {
      check_keys(j, "disturbance", {"type", "value"});
      if (!j.contains("value")) throw ConfigError("disturbance: constant disturbance needs 'value'");
      s.disturbance = ConstantDisturbance{vec3(j["value"], "disturbance.value")};
    } else {
      throw ConfigError("disturbance: unknown type '" + type + "'");
    }
  }

  const bool disturbed = !std::holds_alternative<NoDisturbance>(s.disturbance);
  if (s.case_id == CaseId::adaptive_no_dist && disturbed) {
    throw ConfigError("disturbance: case adaptive_no_dist must not have a disturbance");
  }
  if ((s.case_id == CaseId::adaptive_with_dist || s.case_id == CaseId::robust_with_dist) && !disturbed) {
    throw ConfigError("disturbance: case '" + to_string(s.case_id) + "' needs a disturbance");
  }
  if (s.controller == ControllerKind::robust && !s.robust) {
    throw ConfigError("robust: the robust controller needs robust parameters");
  }

  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

/// Serializes a scenario; scenario_from_json(scenario_to_json(s)) reproduces s.
inline nlohmann::json scenario_to_json(const Scenario& s) {
  using namespace config_detail;
  json j;
  j["case"] = to_string(s.case_id);
  if (s.case_id == CaseId::custom) j["controller"] = to_string(s.controller);
  j["duration"] = s.duration;
  j["step"] = s.integrator.step_size;
  j["output_every"] = s.output_every;
  j["settle"] = s.settle;
  j["seed"] = s.seed;
  j["force_gains"] = s.gains.override_c_condition;
  j["integrator"] = {{"method", to_string(s.integrator.method)},
                     {"newton_tol", s.integrator.newton_tol},
                     {"newton_max_iter", s.integrator.newton_max_iter}};
  const Vec3& g = s.gains.G.diagonal();
  j["gains"] = {{"k_R", s.gains.k_R}, {"k_Omega", s.gains.k_Omega}, {"k_J", s.gains.k_J},
                {"c", s.gains.c}, {"G", {g(0), g(1), g(2)}}};
  if (s.psi_bar) j["gains"]["psi_bar"] = *s.psi_bar;
  if (s.robust) {
    j["robust"] = {{"sigma", s.robust->sigma}, {"epsilon", s.robust->epsilon},
                   {"delta", s.robust->delta_bound}};
  }
  j["J_true"] = to_json(s.J_true.matrix());
  j["J_bar0"] = to_json(s.J_bar0);
  j["R0"] = to_json(s.R0.matrix());
  j["Omega0"] = to_json(s.Omega0);
  if (std::holds_alternative<EulerCommand>(s.command)) {
    const auto& c = std::get<EulerCommand>(s.command);
    j["command"] = {{"type", "euler321"}, {"amplitude_phi", c.amplitude_phi},
                    {"amplitude_theta", c.amplitude_theta}, {"frequency", c.frequency},
                    {"psi", c.psi_const}};
  } else {
    j["command"] = {{"type", "constant"}, {"R_d", to_json(std::get<ConstantCommand>(s.command).R_d.matrix())}};
  }
  if (std::holds_alternative<PaperDisturbance>(s.disturbance)) {
    j["disturbance"] = {{"type", "paper"}, {"amplitude", std::get<PaperDisturbance>(s.disturbance).amplitude}};
  } else if (std::holds_alternative<ConstantDisturbance>(s.disturbance)) {
    j["disturbance"] = {{"type", "constant"},
                        {"value", to_json(std::get<ConstantDisturbance>(s.disturbance).value)}};
  } else {
    j["disturbance"] = {{"type", "none"}};
  }
  return j;
}

/// Applies `a.b.c=value` to a document. The value is parsed as JSON when
/// possible and kept as a string otherwise.
inline void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "': expected key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  nlohmann::json* node = &doc;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("override '" + assignment + "': empty key segment");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override '" + assignment + "': '" + parts[i] + "' is not an object");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = nlohmann::json::object();
  }
  if (!node->is_object()) throw ConfigError("override '" + assignment + "': parent is not an object");
  (*node)[parts.back()] = value;
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
  return j;
}

}  // namespace geoctl
