#pragma once

// Invasiveness witness built from spectroscopic signals.
//
// The three pulses play the roles U1 (state preparation), O (the operation
// whose invasiveness is tested) and U2. The main experiment compares the
// signal with and without O; control experiments do the same for classical
// inputs (exciton eigenstates or their mixtures) and fix the classical range
//   min_j d_j <= d_rho <= max_j d_j.
//
// The measured quantity for an input state is the ensemble average of the
// detected intensity |P|^2 over the pure members of the state, so it is
// linear in classical mixtures.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nlw/dynamics.hpp"
#include "nlw/errors.hpp"
#include "nlw/exciton_model.hpp"
#include "nlw/operator.hpp"
#include "nlw/response.hpp"

namespace nlw {

inline constexpr double kDefaultWitnessTolerance = 1e-9;
inline constexpr double kMaxControlCondition = 1e8;

enum class DetectionMode {
  fixed_direction,  // detector stays on the main k_s; branches missing a pulse give 0
  per_branch,       // each branch is phase matched on its own pulses
};

enum class EvaluationMode { impulsive, convolved };

/// Density matrix, exciton eigenstate label, or classical mixture.
using StateInput = std::variant<DensityMatrix, std::string, ClassicalMixture>;

struct ExperimentSpec {
  ExcitonModel model;
  DephasingModel noise;
  std::array<PulseEvent, 3> pulses;
  double detection_time = 0.0;
  SignPattern pattern = rephasing_pattern();
  DetectionMode detection = DetectionMode::fixed_direction;
  EvaluationMode evaluation = EvaluationMode::impulsive;
  bool semi_impulsive = false;      // use |S|^2 instead of |P|^2
  bool bypass_first_pulse = false;  // pulse 1 replaced by identity
  double quadrature_step = 0.0;     // convolved mode; <= 0 selects min width / 10
};

struct EnsembleMember {
  double weight = 0.0;
  LiouvilleVector state;
};

/// Pure-state decomposition of an input. Diagonal inputs decompose into
/// exciton eigenstates; anything else uses its eigendecomposition.
inline std::vector<EnsembleMember> ensemble_of(const StateInput& input, const ExcitonModel& model) {
  const int n = model.dim();
  std::vector<EnsembleMember> out;
  auto add_populations = [&](const Eigen::VectorXd& p) {
    for (int i = 0; i < n; ++i)
      if (p(i) > 0.0) out.push_back({p(i), LiouvilleVector(Operator::projector(n, i))});
  };
  if (const auto* label = std::get_if<std::string>(&input)) {
    out.push_back({1.0, LiouvilleVector(Operator::projector(n, model.index_of(*label)))});
  } else if (const auto* mix = std::get_if<ClassicalMixture>(&input)) {
    if (mix->dim() != n) throw DimensionMismatch(mix->dim(), n);
    add_populations(mix->populations());
  } else {
    const auto& rho = std::get<DensityMatrix>(input);
    if (rho.dim() != n) throw DimensionMismatch(rho.dim(), n);
    if (rho.max_coherence() == 0.0) {
      add_populations(rho.populations());
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix());
      for (int k = 0; k < n; ++k) {
        const double w = solver.eigenvalues()(k);
        if (w <= rho.tolerance()) continue;
        const Eigen::VectorXcd v = solver.eigenvectors().col(k);
        out.push_back({w, LiouvilleVector(Operator(v * v.adjoint()))});
      }
    }
  }
  return out;
}

inline bool is_classical(const StateInput& input, double tol = kDefaultStateTolerance) {
  if (const auto* rho = std::get_if<DensityMatrix>(&input)) return rho->max_coherence() <= tol;
  return true;
}

/// Pulse indices (0-based) present in a branch.
using Branch = std::vector<int>;

/// Sign pattern a branch is detected with, or nullopt when the detection
/// direction cannot be reached by the pulses present.
inline std::optional<SignPattern> branch_pattern(const ExperimentSpec& spec, const Branch& branch) {
  if (spec.pattern.arity() != 3) throw InvalidArgument("main pattern must have three signs");
  if (spec.detection == DetectionMode::fixed_direction && branch.size() != 3) return std::nullopt;
  std::vector<int> signs;
  for (int k : branch) signs.push_back(spec.pattern[k]);
  return SignPattern(std::move(signs));
}

/// Complex signal (P, or S in semi-impulsive mode) of one branch for one
/// input operator given at the arrival of pulse 1.
inline Complex branch_signal(const ExperimentSpec& spec, const Branch& branch,
                             const LiouvilleVector& input) {
  const auto pattern = branch_pattern(spec, branch);
  if (!pattern) return 0.0;
  const int order = static_cast<int>(branch.size());
  std::vector<PulseEvent> pulses;
  for (int k : branch) pulses.push_back(spec.pulses[static_cast<std::size_t>(k)]);

  // Free evolution from pulse 1's arrival to the first pulse present.
  const double lead = pulses.front().arrival - spec.pulses[0].arrival;
  if (lead < 0.0) throw InvalidArgument("pulse arrivals must be increasing");
  const LiouvilleVector rho = free_propagate(input, lead, spec.model, spec.noise);

  if (spec.semi_impulsive || spec.evaluation == EvaluationMode::impulsive) {
    for (auto& p : pulses) {
      p.mode = PulseMode::impulsive;
      if (spec.semi_impulsive) p.area = 1.0;
    }
    return polarization_impulsive(order, pulses, spec.detection_time, *pattern, spec.model,
                                  spec.noise, rho);
  }
  double step = spec.quadrature_step;
  if (step <= 0.0) {
    double w_min = std::numeric_limits<double>::infinity();
    for (const auto& p : pulses) w_min = std::min(w_min, p.width);
    step = w_min / 10.0;
  }
  return polarization_convolved(order, pulses, spec.detection_time, *pattern, spec.model,
                                spec.noise, rho, step);
}

/// Ensemble-averaged detected intensity of a branch.
inline double branch_intensity(const ExperimentSpec& spec, const Branch& branch,
                               const StateInput& input) {
  double total = 0.0;
  for (const auto& m : ensemble_of(input, spec.model))
    total += m.weight * std::norm(branch_signal(spec, branch, m.state));
  return total;
}

/// d = I(with O) - I(without O) for the main experiment. The input is the
/// state before pulse 1, or the state itself when pulse 1 is bypassed.
inline double run_main_experiment(const ExperimentSpec& spec, const StateInput& input) {
  const Branch with_o = spec.bypass_first_pulse ? Branch{1, 2} : Branch{0, 1, 2};
  const Branch without_o = spec.bypass_first_pulse ? Branch{2} : Branch{0, 2};
  return branch_intensity(spec, with_o, input) - branch_intensity(spec, without_o, input);
}

/// d_j = I(O, U2) - I(U2) for a classical input.
inline double run_control_experiment(const ExperimentSpec& spec, const StateInput& input) {
  if (!is_classical(input))
    throw InputNotClassical("control experiments need an eigenstate or classical mixture input");
  return branch_intensity(spec, Branch{1, 2}, input) - branch_intensity(spec, Branch{2}, input);
}

struct ControlObservation {
  ClassicalMixture mixture;
  double d = 0.0;
};

struct ControlSolution {
  std::map<std::string, double> d;
  double residual = 0.0;
  double condition = 0.0;
};

/// Least-squares solve of sum_j p_j d_j = measured over the observations.
inline ControlSolution solve_controls(const std::vector<ControlObservation>& observations,
                                      const std::vector<std::string>& labels) {
  const auto levels = static_cast<Eigen::Index>(labels.size());
  if (levels == 0) throw InvalidArgument("need at least one level");
  if (static_cast<Eigen::Index>(observations.size()) < levels)
    throw InvalidArgument("need at least " + std::to_string(levels) + " observations, got " +
                          std::to_string(observations.size()));
  const auto rows = static_cast<Eigen::Index>(observations.size());
  Eigen::MatrixXd a(rows, levels);
  Eigen::VectorXd b(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& obs = observations[static_cast<std::size_t>(r)];
    if (obs.mixture.dim() != levels) throw DimensionMismatch(obs.mixture.dim(), static_cast<int>(levels));
    a.row(r) = obs.mixture.populations().transpose();
    b(r) = obs.d;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxControlCondition)) throw IllConditioned(cond);

  const Eigen::VectorXd x = svd.solve(b);
  ControlSolution out;
  for (Eigen::Index j = 0; j < levels; ++j) out.d[labels[static_cast<std::size_t>(j)]] = x(j);
  out.residual = (a * x - b).norm();
  out.condition = cond;
  return out;
}

struct WitnessReport {
  double d_rho = 0.0;
  std::map<std::string, double> controls;
  double lower = 0.0;
  double upper = 0.0;
  bool violated = false;
  double margin = 0.0;
  double tolerance = kDefaultWitnessTolerance;
  std::optional<double> solve_residual;
  std::optional<double> condition_number;
  std::map<std::string, std::string> notes;
};

inline WitnessReport evaluate_witness(double d_rho, const std::map<std::string, double>& controls,
                                      double tol = kDefaultWitnessTolerance) {
  if (controls.empty()) throw InvalidArgument("witness needs at least one control value");
  if (!(tol >= 0.0)) throw InvalidArgument("tolerance must be non-negative");
  WitnessReport r;
  r.d_rho = d_rho;
  r.controls = controls;
  r.tolerance = tol;
  r.lower = std::numeric_limits<double>::infinity();
  r.upper = -std::numeric_limits<double>::infinity();
  for (const auto& [label, d] : controls) {
    r.lower = std::min(r.lower, d);
    r.upper = std::max(r.upper, d);
  }
  r.margin = std::max({r.lower - d_rho, d_rho - r.upper, 0.0});
  r.violated = d_rho < r.lower - tol || d_rho > r.upper + tol;
  return r;
}

struct ControlPlan {
  enum class Kind { eigenstates, gibbs };
  Kind kind = Kind::eigenstates;
  std::vector<double> betas;  // gibbs only, one per observation
};

struct ProtocolConfig {
  ExperimentSpec experiment;
  StateInput main_input;
  ControlPlan controls;
  double tolerance = kDefaultWitnessTolerance;
};

inline std::string to_string(DetectionMode m) {
  return m == DetectionMode::fixed_direction ? "fixed_direction" : "per_branch";
}

inline std::string to_string(EvaluationMode m) {
  return m == EvaluationMode::impulsive ? "impulsive" : "convolved";
}

/// Main experiment, one control per exciton level (directly or through a
/// Gibbs solve), and the inequality check.
inline WitnessReport run_protocol(const ProtocolConfig& cfg) {
  const ExperimentSpec& spec = cfg.experiment;
  const double d_rho = run_main_experiment(spec, cfg.main_input);

  std::map<std::string, double> controls;
  std::optional<ControlSolution> solution;
  if (cfg.controls.kind == ControlPlan::Kind::eigenstates) {
    for (const auto& label : spec.model.labels())
      controls[label] = run_control_experiment(spec, label);
  } else {
    std::vector<ControlObservation> obs;
    for (double beta : cfg.controls.betas) {
      ClassicalMixture mix = gibbs_populations(spec.model, beta);
      const double d = run_control_experiment(spec, mix);
      obs.push_back({std::move(mix), d});
    }
    solution = solve_controls(obs, spec.model.labels());
    controls = solution->d;
  }

  WitnessReport report = evaluate_witness(d_rho, controls, cfg.tolerance);
  if (solution) {
    report.solve_residual = solution->residual;
    report.condition_number = solution->condition;
  }
  report.notes["vertex_prefactor"] = "-i per interaction, hbar = 1";
  report.notes["pattern"] = spec.pattern.to_string() + " denotes k_s = s1 k1 + s2 k2 + s3 k3";
  report.notes["detection"] = to_string(spec.detection);
  report.notes["evaluation"] = to_string(spec.evaluation);
  report.notes["quantity"] = spec.semi_impulsive ? "|S(with O)|^2 - |S(without O)|^2"
                                                 : "|P(with O)|^2 - |P(without O)|^2";
  report.notes["first_pulse"] = spec.bypass_first_pulse ? "identity" : "applied";
  report.notes["controls"] =
      cfg.controls.kind == ControlPlan::Kind::eigenstates ? "eigenstates" : "gibbs";
  return report;
}

}  // namespace nlw
