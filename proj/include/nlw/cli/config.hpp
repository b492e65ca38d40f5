#pragma once

// Scenario files: strict JSON schema, defaults made explicit, and the
// translation into library objects.

#include "json.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nlw/dynamics.hpp"
#include "nlw/errors.hpp"
#include "nlw/exciton_model.hpp"
#include "nlw/response.hpp"
#include "nlw/witness.hpp"

namespace nlw::cli {

using Json = nlohmann::ordered_json;

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SystemConfig {
  std::string type = "dimer";  // dimer | sites
  DimerParams dimer;
  std::vector<double> energies;
  Eigen::MatrixXd couplings;
  std::vector<double> dipoles;
  bool two_exciton = false;
};

struct NoiseConfig {
  double gamma = 0.0;
  std::optional<Eigen::MatrixXd> matrix;
  bool population_decay = false;
};

struct InputConfig {
  std::string kind = "ground";  // ground | gibbs | eigenstate | mixture | matrix
  double beta = 1.0;
  std::string label;
  std::vector<double> populations;
  Eigen::MatrixXd re;
  Eigen::MatrixXd im;
};

struct ControlsConfig {
  std::string kind = "eigenstates";  // eigenstates | gibbs
  std::vector<double> betas;
};

struct ExperimentConfig {
  std::string kind = "protocol";  // protocol | main | control | scan
  std::vector<int> pattern{-1, 1, 1};
  double detection_time = 0.0;
  std::string detection = "fixed_direction";
  std::string evaluation = "impulsive";
  bool semi_impulsive = false;
  bool bypass_first_pulse = false;
  double tolerance = kDefaultWitnessTolerance;
  double quadrature_step = 0.0;
  InputConfig input;
  ControlsConfig controls;
};

struct GridConfig {
  double start = 0.0;
  double step = 1.0;
  int count = 1;

  double at(int i) const { return start + step * static_cast<double>(i); }
};

struct ScanConfig {
  int order = 3;
  std::vector<int> pattern{-1, 1, 1};
  GridConfig t1, t2, t3;
};

struct OutputConfig {
  std::string scan = "scan.csv";
  std::string witness = "witness.json";
  std::string spectrum = "spectrum.csv";
};

struct ScenarioConfig {
  SystemConfig system;
  NoiseConfig noise;
  std::vector<PulseEvent> pulses;
  ExperimentConfig experiment;
  std::optional<ScanConfig> scan;
  OutputConfig output;
};

namespace detail {

/// Strict reader over one JSON object; finish() rejects unconsumed keys.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& field, const std::string& msg) {
    throw ConfigError("schema violation at " + field + ": " + msg);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) fail(field(key), "required");
      return *fallback;
    }
    const Json& v = raw(key);
    if (!v.is_number()) fail(field(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(field(key), "must be finite");
    return d;
  }

  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) fail(field(key), "required");
      return *fallback;
    }
    const Json& v = raw(key);
    if (!v.is_number_integer()) fail(field(key), "expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_boolean()) fail(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) {
      if (!fallback) fail(field(key), "required");
      return *fallback;
    }
    const Json& v = raw(key);
    if (!v.is_string()) fail(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) fail(field(key), "required");
    const Json& v = raw(key);
    if (!v.is_array()) fail(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(field(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<int> signs(const std::string& key, std::vector<int> fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_array() || v.empty() || v.size() > 3) fail(field(key), "expected 1 to 3 signs");
    std::vector<int> out;
    for (const auto& x : v) {
      if (!x.is_number_integer() || (x.get<int>() != 1 && x.get<int>() != -1))
        fail(field(key), "signs must be +1 or -1");
      out.push_back(x.get<int>());
    }
    return out;
  }

  Eigen::MatrixXd matrix(const std::string& key) {
    if (!has(key)) fail(field(key), "required");
    const Json& v = raw(key);
    if (!v.is_array() || v.empty()) fail(field(key), "expected a square array of rows");
    const auto n = static_cast<Eigen::Index>(v.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Json& row = v[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
        fail(field(key), "expected a square array of rows");
      for (Eigen::Index k = 0; k < n; ++k) {
        if (!row[static_cast<std::size_t>(k)].is_number()) fail(field(key), "entries must be numbers");
        m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
      }
    }
    return m;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& field, const std::string& msg) {
  if (!ok) ObjectReader::fail(field, msg);
}

inline SystemConfig parse_system(const Json& j) {
  ObjectReader r(j, "system");
  SystemConfig s;
  s.type = r.string("type", "dimer");
  if (s.type == "dimer") {
    s.dimer.omega_a = r.number("omega_a");
    s.dimer.omega_b = r.number("omega_b");
    s.dimer.j_coupling = r.number("j_coupling", 0.0);
    s.dimer.mu_a = r.number("mu_a", 1.0);
    s.dimer.mu_b = r.number("mu_b", 1.0);
    require(s.dimer.omega_a > 0.0, "system.omega_a", "must be > 0");
    require(s.dimer.omega_b > 0.0, "system.omega_b", "must be > 0");
  } else if (s.type == "sites") {
    s.energies = r.numbers("energies");
    const auto n = static_cast<Eigen::Index>(s.energies.size());
    require(n > 0, "system.energies", "must be non-empty");
    for (double e : s.energies) require(e > 0.0, "system.energies", "must be > 0");
    s.couplings = r.has("couplings") ? r.matrix("couplings") : Eigen::MatrixXd::Zero(n, n);
    require(s.couplings.rows() == n, "system.couplings", "must match the number of sites");
    s.dipoles = r.has("dipoles") ? r.numbers("dipoles") : std::vector<double>(static_cast<std::size_t>(n), 1.0);
    require(static_cast<Eigen::Index>(s.dipoles.size()) == n, "system.dipoles",
            "must match the number of sites");
    s.two_exciton = r.boolean("two_exciton", false);
  } else {
    ObjectReader::fail("system.type", "expected \"dimer\" or \"sites\"");
  }
  r.finish();
  return s;
}

inline NoiseConfig parse_noise(const Json& j) {
  ObjectReader r(j, "noise");
  NoiseConfig n;
  n.gamma = r.number("gamma", 0.0);
  require(n.gamma >= 0.0, "noise.gamma", "must be >= 0");
  if (r.has("matrix") && !j.at("matrix").is_null()) {
    n.matrix = r.matrix("matrix");
    require(n.matrix->minCoeff() >= 0.0, "noise.matrix", "rates must be >= 0");
  } else if (r.has("matrix")) {
    r.raw("matrix");
  }
  n.population_decay = r.boolean("population_decay", false);
  r.finish();
  return n;
}

inline PulseEvent parse_pulse(const Json& j, int index) {
  const std::string path = "pulses[" + std::to_string(index) + "]";
  ObjectReader r(j, path);
  PulseEvent p;
  p.arrival = r.number("arrival");
  const std::string mode = r.string("mode", "impulsive");
  if (mode == "impulsive") {
    p.mode = PulseMode::impulsive;
  } else if (mode == "finite") {
    p.mode = PulseMode::finite;
  } else {
    ObjectReader::fail(path + ".mode", "expected \"impulsive\" or \"finite\"");
  }
  p.area = r.number("area", 1.0);
  p.width = r.number("width", 0.0);
  p.carrier = r.number("carrier", 0.0);
  p.slot = r.integer("slot", index + 1);
  require(p.width >= 0.0, path + ".width", "must be >= 0");
  require(p.mode == PulseMode::impulsive || p.width > 0.0, path + ".width",
          "must be > 0 for finite pulses");
  require(p.slot >= 1 && p.slot <= 3, path + ".slot", "must be 1, 2 or 3");
  r.finish();
  return p;
}

inline InputConfig parse_input(const Json& j) {
  ObjectReader r(j, "experiment.input");
  InputConfig in;
  in.kind = r.string("kind", "ground");
  if (in.kind == "ground") {
  } else if (in.kind == "gibbs") {
    in.beta = r.number("beta");
    require(in.beta >= 0.0, "experiment.input.beta", "must be >= 0");
  } else if (in.kind == "eigenstate") {
    in.label = r.string("label");
  } else if (in.kind == "mixture") {
    in.populations = r.numbers("populations");
  } else if (in.kind == "matrix") {
    in.re = r.matrix("re");
    in.im = r.has("im") ? r.matrix("im") : Eigen::MatrixXd::Zero(in.re.rows(), in.re.cols());
    require(in.im.rows() == in.re.rows(), "experiment.input.im", "must match re");
  } else {
    ObjectReader::fail("experiment.input.kind",
                       "expected ground, gibbs, eigenstate, mixture or matrix");
  }
  r.finish();
  return in;
}

inline ControlsConfig parse_controls(const Json& j) {
  ObjectReader r(j, "experiment.controls");
  ControlsConfig c;
  c.kind = r.string("kind", "eigenstates");
  if (c.kind == "gibbs") {
    c.betas = r.numbers("betas");
    for (double b : c.betas) require(b >= 0.0, "experiment.controls.betas", "must be >= 0");
  } else if (c.kind != "eigenstates") {
    ObjectReader::fail("experiment.controls.kind", "expected \"eigenstates\" or \"gibbs\"");
  }
  r.finish();
  return c;
}

inline ExperimentConfig parse_experiment(const Json& j) {
  ObjectReader r(j, "experiment");
  ExperimentConfig e;
  e.kind = r.string("kind", "protocol");
  require(e.kind == "protocol" || e.kind == "main" || e.kind == "control" || e.kind == "scan",
          "experiment.kind", "expected protocol, main, control or scan");
  e.pattern = r.signs("pattern", e.pattern);
  require(e.pattern.size() == 3, "experiment.pattern", "needs three signs");
  e.detection_time = r.number("detection_time", 0.0);
  e.detection = r.string("detection", e.detection);
  require(e.detection == "fixed_direction" || e.detection == "per_branch", "experiment.detection",
          "expected \"fixed_direction\" or \"per_branch\"");
  e.evaluation = r.string("evaluation", e.evaluation);
  require(e.evaluation == "impulsive" || e.evaluation == "convolved", "experiment.evaluation",
          "expected \"impulsive\" or \"convolved\"");
  e.semi_impulsive = r.boolean("semi_impulsive", false);
  e.bypass_first_pulse = r.boolean("bypass_first_pulse", false);
  e.tolerance = r.number("tolerance", e.tolerance);
  require(e.tolerance >= 0.0, "experiment.tolerance", "must be >= 0");
  e.quadrature_step = r.number("quadrature_step", 0.0);
  require(e.quadrature_step >= 0.0, "experiment.quadrature_step", "must be >= 0");
  if (r.has("input")) e.input = parse_input(r.raw("input"));
  if (r.has("controls")) e.controls = parse_controls(r.raw("controls"));
  r.finish();
  return e;
}

inline GridConfig parse_grid(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  GridConfig g;
  g.start = r.number("start", 0.0);
  g.step = r.number("step", 1.0);
  g.count = r.integer("count", 1);
  require(g.start >= 0.0, path + ".start", "delays must be >= 0");
  require(g.step > 0.0, path + ".step", "must be > 0");
  require(g.count >= 1, path + ".count", "must be >= 1");
  r.finish();
  return g;
}

inline ScanConfig parse_scan(const Json& j) {
  ObjectReader r(j, "scan");
  ScanConfig s;
  s.order = r.integer("order", 3);
  require(s.order >= 1 && s.order <= 3, "scan.order", "must be 1, 2 or 3");
  // Defaults follow the three-pulse timeline: order 2 drops pulse 2, order 1 keeps pulse 3.
  const std::vector<int> fallback = s.order == 3 ? std::vector<int>{-1, 1, 1}
                                    : s.order == 2 ? std::vector<int>{-1, 1}
                                                   : std::vector<int>{1};
  s.pattern = r.signs("pattern", fallback);
  require(static_cast<int>(s.pattern.size()) == s.order, "scan.pattern", "arity must equal order");
  if (r.has("t1")) s.t1 = parse_grid(r.raw("t1"), "scan.t1");
  if (r.has("t2")) s.t2 = parse_grid(r.raw("t2"), "scan.t2");
  if (r.has("t3")) s.t3 = parse_grid(r.raw("t3"), "scan.t3");
  r.finish();
  return s;
}

inline OutputConfig parse_output(const Json& j) {
  ObjectReader r(j, "output");
  OutputConfig o;
  o.scan = r.string("scan", o.scan);
  o.witness = r.string("witness", o.witness);
  o.spectrum = r.string("spectrum", o.spectrum);
  r.finish();
  return o;
}

}  // namespace detail

inline ExcitonModel build_model(const ScenarioConfig& cfg) {
  const SystemConfig& s = cfg.system;
  if (s.type == "dimer") return build_dimer(s.dimer);
  return build_general(s.energies, s.couplings, s.dipoles, s.two_exciton);
}

inline DephasingModel build_noise(const ScenarioConfig& cfg, int dim) {
  if (cfg.noise.matrix) {
    Eigen::MatrixXd g = *cfg.noise.matrix;
    if (g.rows() != dim) throw ConfigError("schema violation at noise.matrix: must be " +
                                           std::to_string(dim) + "x" + std::to_string(dim));
    return DephasingModel(std::move(g));
  }
  return DephasingModel::uniform(dim, cfg.noise.gamma, cfg.noise.population_decay);
}

inline StateInput build_input(const InputConfig& in, const ExcitonModel& model) {
  if (in.kind == "ground") return gibbs_state(model, std::numeric_limits<double>::infinity());
  if (in.kind == "gibbs") return gibbs_state(model, in.beta);
  if (in.kind == "eigenstate") {
    model.index_of(in.label);
    return in.label;
  }
  if (in.kind == "mixture") {
    Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(in.populations.data(),
                                                          static_cast<Eigen::Index>(in.populations.size()));
    if (p.size() != model.dim()) throw DimensionMismatch(static_cast<int>(p.size()), model.dim());
    return ClassicalMixture(std::move(p));
  }
  Matrix m(in.re.rows(), in.re.cols());
  m.real() = in.re;
  m.imag() = in.im;
  if (m.rows() != model.dim()) throw DimensionMismatch(static_cast<int>(m.rows()), model.dim());
  return validate_density(Operator(std::move(m)));
}

inline ExperimentSpec build_experiment(const ScenarioConfig& cfg) {
  ExcitonModel model = build_model(cfg);
  DephasingModel noise = build_noise(cfg, model.dim());
  if (cfg.pulses.size() != 3) throw ConfigError("schema violation at pulses: need exactly three pulses");
  const auto& e = cfg.experiment;
  return ExperimentSpec{
      .model = std::move(model),
      .noise = std::move(noise),
      .pulses = {cfg.pulses[0], cfg.pulses[1], cfg.pulses[2]},
      .detection_time = e.detection_time,
      .pattern = SignPattern(e.pattern),
      .detection = e.detection == "per_branch" ? DetectionMode::per_branch : DetectionMode::fixed_direction,
      .evaluation = e.evaluation == "convolved" ? EvaluationMode::convolved : EvaluationMode::impulsive,
      .semi_impulsive = e.semi_impulsive,
      .bypass_first_pulse = e.bypass_first_pulse,
      .quadrature_step = e.quadrature_step,
  };
}

inline ProtocolConfig build_protocol(const ScenarioConfig& cfg) {
  ExperimentSpec spec = build_experiment(cfg);
  StateInput input = build_input(cfg.experiment.input, spec.model);
  ControlPlan plan;
  if (cfg.experiment.controls.kind == "gibbs") {
    plan.kind = ControlPlan::Kind::gibbs;
    plan.betas = cfg.experiment.controls.betas;
  }
  return ProtocolConfig{.experiment = std::move(spec),
                        .main_input = std::move(input),
                        .controls = std::move(plan),
                        .tolerance = cfg.experiment.tolerance};
}

/// Cross-field checks that need the built model; every failure is a
/// ConfigError naming the field.
inline void check_semantics(const ScenarioConfig& cfg) {
  auto wrap = [](const std::string& field, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& err) {
      throw ConfigError("schema violation at " + field + ": " + err.what());
    }
  };
  std::optional<ExcitonModel> model;
  wrap("system", [&] { model.emplace(build_model(cfg)); });
  wrap("noise", [&] { build_noise(cfg, model->dim()); });
  wrap("experiment.input", [&] { build_input(cfg.experiment.input, *model); });

  for (std::size_t k = 1; k < cfg.pulses.size(); ++k)
    detail::require(cfg.pulses[k].arrival > cfg.pulses[k - 1].arrival,
                    "pulses[" + std::to_string(k) + "].arrival", "arrivals must be strictly increasing");

  const auto& e = cfg.experiment;
  if (e.kind == "scan") {
    detail::require(cfg.scan.has_value(), "scan", "required for experiment kind scan");
  } else {
    detail::require(cfg.pulses.size() == 3, "pulses", "need exactly three pulses");
    detail::require(e.detection_time >= cfg.pulses.back().arrival, "experiment.detection_time",
                    "must not precede the last pulse");
    if (e.evaluation == "convolved" && !e.semi_impulsive) {
      for (std::size_t k = 0; k < cfg.pulses.size(); ++k)
        detail::require(cfg.pulses[k].mode == PulseMode::finite,
                        "pulses[" + std::to_string(k) + "].mode", "convolved evaluation needs finite pulses");
    }
    if (e.controls.kind == "gibbs") {
      detail::require(static_cast<int>(e.controls.betas.size()) >= model->dim(),
                      "experiment.controls.betas",
                      "need at least " + std::to_string(model->dim()) + " temperatures");
    }
    if (e.kind == "control") {
      wrap("experiment.input", [&] {
        if (!is_classical(build_input(e.input, *model)))
          throw InputNotClassical("control experiments need a classical input");
      });
    }
  }
  if (cfg.scan) {
    detail::require(cfg.pulses.empty() || cfg.pulses.size() == 3, "pulses",
                    "scan uses either no pulses (unit areas) or three");
    wrap("system", [&] { split_dipole(*model); });
  }
}

inline ScenarioConfig parse_config(const Json& j) {
  detail::ObjectReader r(j, "");
  ScenarioConfig cfg;
  if (!r.has("system")) detail::ObjectReader::fail("system", "required");
  cfg.system = detail::parse_system(r.raw("system"));
  if (r.has("noise")) cfg.noise = detail::parse_noise(r.raw("noise"));
  if (r.has("pulses")) {
    const Json& ps = r.raw("pulses");
    detail::require(ps.is_array(), "pulses", "expected an array");
    for (std::size_t k = 0; k < ps.size(); ++k)
      cfg.pulses.push_back(detail::parse_pulse(ps[k], static_cast<int>(k)));
  } else {
    for (int k = 0; k < 3; ++k) cfg.pulses.push_back(PulseEvent::impulsive(k, 1.0, k + 1));
  }
  if (r.has("experiment")) cfg.experiment = detail::parse_experiment(r.raw("experiment"));
  const bool has_detection = j.contains("experiment") && j.at("experiment").is_object() &&
                             j.at("experiment").contains("detection_time");
  if (!has_detection && !cfg.pulses.empty()) cfg.experiment.detection_time = cfg.pulses.back().arrival + 1.0;
  if (r.has("scan")) cfg.scan = detail::parse_scan(r.raw("scan"));
  if (r.has("output")) cfg.output = detail::parse_output(r.raw("output"));
  r.finish();
  check_semantics(cfg);
  return cfg;
}

inline ScenarioConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw ConfigError(std::string("parse error: ") + err.what());
  }
  return parse_config(j);
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace detail {

inline Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json grid_json(const GridConfig& g) {
  return Json{{"start", g.start}, {"step", g.step}, {"count", g.count}};
}

}  // namespace detail

/// Canonical form with every default explicit.
inline Json to_json(const ScenarioConfig& cfg) {
  Json j;
  Json sys;
  sys["type"] = cfg.system.type;
  if (cfg.system.type == "dimer") {
    sys["omega_a"] = cfg.system.dimer.omega_a;
    sys["omega_b"] = cfg.system.dimer.omega_b;
    sys["j_coupling"] = cfg.system.dimer.j_coupling;
    sys["mu_a"] = cfg.system.dimer.mu_a;
    sys["mu_b"] = cfg.system.dimer.mu_b;
  } else {
    sys["energies"] = cfg.system.energies;
    sys["couplings"] = detail::matrix_json(cfg.system.couplings);
    sys["dipoles"] = cfg.system.dipoles;
    sys["two_exciton"] = cfg.system.two_exciton;
  }
  j["system"] = std::move(sys);

  Json noise;
  noise["gamma"] = cfg.noise.gamma;
  noise["matrix"] = cfg.noise.matrix ? detail::matrix_json(*cfg.noise.matrix) : Json(nullptr);
  noise["population_decay"] = cfg.noise.population_decay;
  j["noise"] = std::move(noise);

  Json pulses = Json::array();
  for (const auto& p : cfg.pulses) {
    pulses.push_back(Json{{"arrival", p.arrival},
                          {"mode", p.mode == PulseMode::finite ? "finite" : "impulsive"},
                          {"area", p.area},
                          {"width", p.width},
                          {"carrier", p.carrier},
                          {"slot", p.slot}});
  }
  j["pulses"] = std::move(pulses);

  const auto& e = cfg.experiment;
  Json exp;
  exp["kind"] = e.kind;
  exp["pattern"] = e.pattern;
  exp["detection_time"] = e.detection_time;
  exp["detection"] = e.detection;
  exp["evaluation"] = e.evaluation;
  exp["semi_impulsive"] = e.semi_impulsive;
  exp["bypass_first_pulse"] = e.bypass_first_pulse;
  exp["tolerance"] = e.tolerance;
  exp["quadrature_step"] = e.quadrature_step;
  Json input{{"kind", e.input.kind}};
  if (e.input.kind == "gibbs") input["beta"] = e.input.beta;
  if (e.input.kind == "eigenstate") input["label"] = e.input.label;
  if (e.input.kind == "mixture") input["populations"] = e.input.populations;
  if (e.input.kind == "matrix") {
    input["re"] = detail::matrix_json(e.input.re);
    input["im"] = detail::matrix_json(e.input.im);
  }
  exp["input"] = std::move(input);
  Json controls{{"kind", e.controls.kind}};
  if (e.controls.kind == "gibbs") controls["betas"] = e.controls.betas;
  exp["controls"] = std::move(controls);
  j["experiment"] = std::move(exp);

  if (cfg.scan) {
    j["scan"] = Json{{"order", cfg.scan->order},
                     {"pattern", cfg.scan->pattern},
                     {"t1", detail::grid_json(cfg.scan->t1)},
                     {"t2", detail::grid_json(cfg.scan->t2)},
                     {"t3", detail::grid_json(cfg.scan->t3)}};
  }
  j["output"] = Json{{"scan", cfg.output.scan},
                     {"witness", cfg.output.witness},
                     {"spectrum", cfg.output.spectrum}};
  return j;
}

}  // namespace nlw::cli
