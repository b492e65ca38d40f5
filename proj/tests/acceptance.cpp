// Acceptance suite: one PASS/FAIL line per criterion, each with its time
// budget. Exit status is nonzero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nlw/nlw.hpp"
#include "oracles.hpp"

using namespace nlw;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

struct Paths {
  std::string cli;
  std::string scenarios;
  std::string workdir;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix random_hermitian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

std::vector<double> random_delays(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<double> d;
  for (int i = 0; i < n; ++i) d.push_back(u(rng));
  return d;
}

Outcome dimer_closed_form() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const DimerParams p = oracle::random_dimer(rng);
    const ExcitonModel m = build_dimer(p);
    Eigen::SelfAdjointEigenSolver<Matrix> es(oracle::dimer_site_hamiltonian(p));
    const Matrix v = es.eigenvectors();
    const Matrix mu = v.adjoint() * oracle::dimer_site_dipole(p) * v;
    for (int i = 0; i < 4; ++i) {
      const double e = es.eigenvalues()(i);
      if (i > 0) worst = std::max(worst, std::abs(m.energy(i) - e) / std::abs(e));
      for (int j = 0; j < 4; ++j) {
        const double scale = std::max(std::abs(mu(i, j)), 1.0);
        worst = std::max(worst, std::abs(std::abs(mu(i, j)) - std::abs(m.mu()(i, j))) / scale);
      }
    }
  }
  return {worst <= 1e-12, "worst relative deviation " + sci(worst) + " over 1000 dimers"};
}

Outcome parity_second_order() {
  const ExcitonModel m = build_dimer({10.0, 9.0, 0.5});
  const DephasingModel noise = DephasingModel::uniform(4, 0.1);
  const LiouvilleVector rho = gibbs_state(m, 0.2);
  double worst = 0.0;
  long points = 0;
  for (const auto& pattern : SignPattern::all(2)) {
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
        for (int k = 0; k < 16; ++k) {
          // Pulses 1 and 3 of a three-pulse timeline; pulse 2 is absent.
          const double a1 = 0.25 * i, a3 = a1 + 0.25 * j + 1e-3;
          const std::vector<PulseEvent> pulses{PulseEvent::impulsive(a1), PulseEvent::impulsive(a3)};
          const Complex p = polarization_impulsive(2, pulses, a3 + 0.25 * k, pattern, m, noise, rho);
          worst = std::max(worst, std::abs(p));
          ++points;
        }
  }
  return {worst <= 1e-12, "max |P2| " + sci(worst) + " over " + std::to_string(points) + " points"};
}

Outcome classical_bounded() {
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  int runs = 0, outside = 0;
  double worst = 0.0;
  for (; runs < 240; ++runs) {
    const DimerParams p = oracle::random_dimer(rng);
    ExperimentSpec spec{build_dimer(p), DephasingModel::uniform(4, u(rng) / 10.0), {}, 0.0};
    const double a1 = u(rng), a2 = a1 + 0.1 + u(rng);
    spec.pulses = {PulseEvent::impulsive(0.0), PulseEvent::impulsive(a1 + 0.05), PulseEvent::impulsive(a2)};
    spec.detection_time = a2 + u(rng);
    spec.detection = DetectionMode::per_branch;
    spec.bypass_first_pulse = true;
    const ClassicalMixture mix = oracle::random_mixture(rng, 4);
    const WitnessReport r = run_protocol({spec, mix, {}, kDefaultWitnessTolerance});
    const double excess = std::max(r.lower - r.d_rho, r.d_rho - r.upper);
    worst = std::max(worst, excess);
    if (excess > 1e-9) ++outside;
  }
  return {outside == 0, std::to_string(runs) + " runs, " + std::to_string(outside) +
                            " outside, worst excess " + sci(worst)};
}

Outcome ideal_dimer_violation() {
  const ExcitonModel m = build_dimer({10.0, 9.0, 0.5});
  ExperimentSpec spec{m, DephasingModel::none(4),
                      {PulseEvent::impulsive(0.0), PulseEvent::impulsive(0.7), PulseEvent::impulsive(1.6)},
                      2.5};
  const WitnessReport r = run_protocol({spec, std::string("g"), {}, kDefaultWitnessTolerance});
  double worst = 0.0;
  for (const auto& [label, d] : r.controls) worst = std::max(worst, std::abs(d));
  const bool ok = worst <= 1e-12 && r.d_rho > 1e-6 && r.violated;
  return {ok, "d_rho " + sci(r.d_rho) + ", max |d_j| " + sci(worst) + ", violated " +
                  (r.violated ? "true" : "false")};
}

/// Dimer with the alpha transitions removed: the ladder g - beta - f,
/// on which every pathway is a single diagram.
ExcitonModel beta_ladder(const DimerParams& p) {
  const ExcitonModel m = build_dimer(p);
  Matrix mu = m.mu().matrix();
  const int alpha = m.index_of("alpha");
  mu.row(alpha).setZero();
  mu.col(alpha).setZero();
  return m.with_dipole(Operator(mu));
}

Outcome pathway_dephasing() {
  std::mt19937_64 rng(1005);
  const std::vector<ExcitonModel> models{oracle::two_level(1.7), beta_ladder(oracle::random_dimer(rng))};
  const double a[] = {0.4, 0.7, 0.5};
  const double b[] = {0.4, 0.7, 2.0};
  double worst = 0.0;
  int checked = 0;
  for (const auto& m : models) {
    const LiouvilleVector g = eigenstate(m, "g");
    for (double gamma : {0.01, 0.1, 1.0}) {
      const DephasingModel noise = DephasingModel::uniform(m.dim(), gamma);
      for (const auto& t : surviving_pathways(3, m, g)) {
        const Complex sa = evaluate_pathway(t, a, m, noise, g);
        const Complex sb = evaluate_pathway(t, b, m, noise, g);
        if (std::abs(sa) < 1e-8) continue;
        const double expect = std::exp(-gamma * 1.5);
        worst = std::max(worst, std::abs(std::abs(sb) / std::abs(sa) - expect) / expect);
        ++checked;
      }
    }
  }
  return {checked > 0 && worst <= 1e-9,
          std::to_string(checked) + " pathway/rate pairs, worst relative error " + sci(worst)};
}

Outcome oracle_agreement() {
  const std::vector<double> lambdas{0.02, 0.04, 0.06, 0.08};
  struct Case {
    std::string name;
    ExcitonModel model;
  };
  const std::vector<Case> cases{{"two-level", oracle::two_level(10.0)}, {"dimer", build_dimer({10.0, 9.0, 0.5})}};
  std::string detail;
  bool ok = true;
  for (const auto& c : cases) {
    const int n = c.model.dim();
    oracle::DrivenSetup setup{c.model, DephasingModel::uniform(n, 0.05),
                              {PulseEvent::gaussian(0.0, 1.0, 0.25, 10.0), PulseEvent::gaussian(3.0, 1.0, 0.25, 10.0),
                               PulseEvent::gaussian(6.0, 1.0, 0.25, 10.0)},
                              8.0, rephasing_pattern(), 0.004};
    std::vector<Complex> values;
    for (double l : lambdas) values.push_back(oracle::phase_cycled_component(setup, l));
    const Complex c3 = oracle::cubic_coefficient(lambdas, values);
    const Complex p3 = polarization_convolved(3, setup.pulses, setup.detection_time, setup.pattern, c.model,
                                              setup.noise, eigenstate(c.model, "g"),
                                              0.0125);
    const double err = std::abs(c3 - p3) / std::abs(p3);
    ok = ok && err <= 1e-3;
    detail += (detail.empty() ? "" : ", ") + c.name + " relative error " + sci(err);
  }
  return {ok, detail};
}

Outcome gibbs_controls() {
  ExperimentSpec spec{oracle::two_level(2.0), DephasingModel::uniform(2, 0.1),
                      {PulseEvent::impulsive(0.0), PulseEvent::impulsive(0.6), PulseEvent::impulsive(1.4)},
                      2.0, rephasing_pattern(), DetectionMode::per_branch};
  const WitnessReport r =
      run_protocol({spec, std::string("g"), {ControlPlan::Kind::gibbs, {0.5, 2.0}}, kDefaultWitnessTolerance});
  const double residual = r.solve_residual.value_or(1.0);
  bool raised = false;
  try {
    run_protocol({spec, std::string("g"), {ControlPlan::Kind::gibbs, {1.0, 1.0}}, kDefaultWitnessTolerance});
  } catch (const IllConditioned&) {
    raised = true;
  }

  // Synthetic per-level values on a dimer, recovered from n + 1 Gibbs observations.
  const ExcitonModel dimer = build_dimer({1.0, 0.7, 0.2});
  const std::vector<double> truth{0.3, -1.2, 2.5, 0.8};
  std::vector<ControlObservation> obs;
  for (double beta : {0.0, 0.7, 1.5, 3.0}) {
    ClassicalMixture mix = gibbs_populations(dimer, beta);
    const double d = mix.populations().dot(Eigen::Map<const Eigen::VectorXd>(truth.data(), 4));
    obs.push_back({std::move(mix), d});
  }
  const ControlSolution sol = solve_controls(obs, dimer.labels());
  double recovery = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j)
    recovery = std::max(recovery, std::abs(sol.d.at(dimer.labels()[j]) - truth[j]));

  const bool ok = residual < 1e-10 && sol.residual < 1e-10 && recovery < 1e-8 && raised;
  return {ok, "two-level residual " + sci(residual) + ", dimer residual " + sci(sol.residual) +
                  ", dimer recovery error " + sci(recovery) + " (condition " + sci(sol.condition) +
                  "), duplicate temperature " + (raised ? "raised IllConditioned" : "did not raise")};
}

Outcome propagation_properties() {
  std::mt19937_64 rng(1008);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  double trace = 0.0, herm = 0.0, semi = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const ExcitonModel m = build_dimer(oracle::random_dimer(rng));
    const DephasingModel noise = DephasingModel::uniform(4, u(rng) / 5.0);
    const LiouvilleVector a(Operator(random_hermitian(rng, 4)));
    const double t1 = u(rng), t2 = u(rng);
    const LiouvilleVector once = free_propagate(a, t1 + t2, m, noise);
    const LiouvilleVector twice = free_propagate(free_propagate(a, t1, m, noise), t2, m, noise);
    trace = std::max(trace, std::abs(once.op().trace() - a.op().trace()));
    herm = std::max(herm, once.op().hermiticity_error());
    semi = std::max(semi, max_abs(once.matrix() - twice.matrix()) / max_abs(a.matrix()));
  }

  const ExcitonModel m = build_dimer({3.0, 2.5, 0.4});
  const DensityMatrix g = eigenstate(m, "g");
  const FieldProfile field = gaussian_pulse_field(0.0, 2.0, 0.6, 2.8);
  auto final_state = [&](double h) {
    EvolveOptions opt;
    opt.step = h;
    opt.t_start = field.t_min;
    opt.t_end = field.t_max + 1.0;
    return nonperturbative_evolve(g, field, m, DephasingModel::uniform(4, 0.1), opt).back().state.matrix();
  };
  const Matrix ref = final_state(0.0025);
  const double reduction = max_abs(final_state(0.08) - ref) / max_abs(final_state(0.04) - ref);

  const bool ok = trace <= 1e-12 && herm <= 1e-12 && semi <= 1e-12 && reduction >= 8.0;
  return {ok, "trace " + sci(trace) + ", hermiticity " + sci(herm) + ", semigroup " + sci(semi) +
                  ", step-halving error reduction " + sci(reduction)};
}

Outcome partition_completeness() {
  std::mt19937_64 rng(1009);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ExcitonModel m = build_dimer(oracle::random_dimer(rng));
    const DephasingModel noise = DephasingModel::uniform(4, u(rng));
    const LiouvilleVector rho = oracle::random_mixture(rng, 4).density();
    for (int order = 1; order <= 3; ++order) {
      const auto d = random_delays(rng, order);
      Complex sum = 0.0;
      for (const auto& p : SignPattern::all(order)) sum += select_phase_matched(order, p, d, m, noise, rho);
      const Complex full = response_function(order, d, m, noise, rho);
      worst = std::max(worst, std::abs(sum - full) / std::max(1.0, std::abs(full)));
    }
  }
  return {worst <= 1e-12, "worst deviation " + sci(worst) + " over 300 responses"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism(const Paths& paths) {
  const fs::path root = fs::path(paths.workdir) / "determinism";
  fs::remove_all(root);
  struct Job {
    std::string scenario, command, file;
  };
  const std::vector<Job> jobs{{"ideal_dimer.json", "witness", "witness.json"},
                              {"classical_input.json", "witness", "witness.json"},
                              {"spectrum.json", "scan", "rephasing_scan.csv"}};
  std::string detail;
  bool ok = true;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    std::string first;
    for (int run = 0; run < 2; ++run) {
      const fs::path out = root / (std::to_string(j) + "_" + std::to_string(run));
      const std::string cmd = paths.cli + " --config " + paths.scenarios + "/" + jobs[j].scenario +
                              " --threads " + (run == 0 ? "1" : "4") + " --output " + out.string() + " " +
                              jobs[j].command + " > /dev/null";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        return {false, jobs[j].scenario + " exited with status " + std::to_string(status)};
      }
      const std::string text = slurp(out / jobs[j].file);
      if (run == 0) {
        first = text;
      } else if (text != first || text.empty()) {
        ok = false;
        detail += jobs[j].scenario + " differs; ";
      }
    }
  }
  return {ok, ok ? "witness and scan outputs byte-identical across runs and thread counts" : detail};
}

}  // namespace

int main(int argc, char** argv) {
  Paths paths;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") paths.cli = argv[i + 1];
    else if (flag == "--scenarios") paths.scenarios = argv[i + 1];
    else if (flag == "--workdir") paths.workdir = argv[i + 1];
    else {
      std::cerr << "usage: acceptance --cli PATH --scenarios DIR --workdir DIR\n";
      return 2;
    }
  }
  if (paths.workdir.empty()) paths.workdir = (fs::temp_directory_path() / "nlw_acceptance").string();

  const std::vector<Criterion> criteria{
      {1, "closed-form dimer matches numerical diagonalization", 1.0, dimer_closed_form},
      {2, "second-order response vanishes on the parity dimer", 10.0, parity_second_order},
      {3, "classical mixtures stay inside the control range", 30.0, classical_bounded},
      {4, "ideal dimer violates the witness with vanishing controls", 5.0, ideal_dimer_violation},
      {5, "single-pathway dephasing ratio", 5.0, pathway_dephasing},
      {6, "phase-cycled nonperturbative oracle matches the convolved response", 120.0, oracle_agreement},
      {7, "Gibbs control solve and duplicate-temperature rejection", 1.0, gibbs_controls},
      {8, "free propagation invariants and integrator convergence", 10.0, propagation_properties},
      {9, "phase-matched partition is complete", 5.0, partition_completeness},
      {10, "CLI outputs are deterministic", 5.0, [&] {
         if (paths.cli.empty() || paths.scenarios.empty()) return Outcome{false, "--cli and --scenarios required"};
         return cli_determinism(paths);
       }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = elapsed <= c.budget_s;
    const bool pass = out.pass && in_time;
    failures += !pass;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2fs / %.0fs", elapsed, c.budget_s);
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << " (" << timing << "): " << out.detail
              << (in_time ? "" : " [over time budget]") << "\n";
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
