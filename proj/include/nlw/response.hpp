#pragma once

// Perturbative response functions and induced polarizations.
//
// S(n)(t1..tn) is built sequentially: vertex -i[mu, .], damped free
// propagation over t_k, ..., and finally the trace with mu. Phase matching
// splits mu = mu+ + mu- (raising/lowering in the exciton basis); a "+" slot
// uses mu+ on both sides of its commutator and a "-" slot uses mu-, so the
// 2^n sign patterns partition the full response exactly.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nlw/dynamics.hpp"
#include "nlw/errors.hpp"
#include "nlw/exciton_model.hpp"
#include "nlw/operator.hpp"

namespace nlw {

inline constexpr int kMaxOrder = 3;

inline void check_order(int order) {
  if (order < 1 || order > kMaxOrder)
    throw InvalidArgument("response order must be 1, 2 or 3, got " + std::to_string(order));
}

/// Wavevector signs (s1, ..., sn) of k_s = s1 k1 + ... + sn kn.
class SignPattern {
 public:
  SignPattern() = default;
  explicit SignPattern(std::vector<int> signs) : s_(std::move(signs)) {
    check_order(arity());
    for (int s : s_)
      if (s != 1 && s != -1) throw InvalidArgument("pattern entries must be +1 or -1");
  }
  SignPattern(std::initializer_list<int> signs) : SignPattern(std::vector<int>(signs)) {}

  int arity() const { return static_cast<int>(s_.size()); }
  int operator[](int i) const { return s_.at(static_cast<std::size_t>(i)); }
  const std::vector<int>& signs() const { return s_; }

  /// "(-,+,+)"
  std::string to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < s_.size(); ++i) {
      if (i) out += ',';
      out += s_[i] > 0 ? '+' : '-';
    }
    return out + ")";
  }

  static std::vector<SignPattern> all(int arity) {
    check_order(arity);
    std::vector<SignPattern> out;
    for (int mask = 0; mask < (1 << arity); ++mask) {
      std::vector<int> s(static_cast<std::size_t>(arity));
      for (int i = 0; i < arity; ++i) s[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? -1 : 1;
      out.emplace_back(std::move(s));
    }
    return out;
  }

  friend bool operator==(const SignPattern&, const SignPattern&) = default;

 private:
  std::vector<int> s_;
};

/// k_s = -k1 + k2 + k3
inline SignPattern rephasing_pattern() { return SignPattern{-1, 1, 1}; }
/// k_s = +k1 - k2 + k3
inline SignPattern nonrephasing_pattern() { return SignPattern{1, -1, 1}; }

enum class Side { left, right };
enum class Part { raising, lowering };

struct Interaction {
  Side side = Side::left;
  Part part = Part::raising;
  friend bool operator==(const Interaction&, const Interaction&) = default;
};

/// One term of the expanded nested commutators.
struct PathwayTerm {
  std::vector<Interaction> steps;
  int sign = 1;  // (-1)^(number of right-side actions)
  SignPattern phase_signature;
};

struct DipoleParts {
  Operator raising;   // <i|mu|j> with eps_i > eps_j
  Operator lowering;  // <i|mu|j> with eps_i < eps_j
};

inline DipoleParts split_dipole(const ExcitonModel& model) {
  const int n = model.dim();
  Matrix up = Matrix::Zero(n, n);
  Matrix down = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Complex m = model.mu()(i, j);
      if (m == Complex(0.0)) continue;
      const double de = model.energy(i) - model.energy(j);
      if (de > 0.0) {
        up(i, j) = m;
      } else if (de < 0.0) {
        down(i, j) = m;
      } else {
        throw InvalidArgument("dipole couples degenerate levels " + model.labels()[i] + ", " +
                              model.labels()[j] + "; no phase signature exists");
      }
    }
  }
  return {Operator(std::move(up)), Operator(std::move(down))};
}

namespace detail {

inline void check_delays(int order, std::span<const double> delays) {
  check_order(order);
  if (static_cast<int>(delays.size()) != order)
    throw InvalidArgument("order " + std::to_string(order) + " needs " + std::to_string(order) +
                          " delays");
  for (double t : delays) {
    if (!std::isfinite(t)) throw InvalidArgument("delays must be finite");
    if (t < 0.0) throw InvalidArgument("response functions are causal; delays must be >= 0");
  }
}

inline Complex vertex_chain(std::span<const Operator* const> dipoles, std::span<const double> delays,
                            const ExcitonModel& model, const DephasingModel& noise,
                            const LiouvilleVector& rho_in) {
  LiouvilleVector s = rho_in;
  for (std::size_t k = 0; k < dipoles.size(); ++k) {
    s = apply_vertex(s, *dipoles[k]);
    s = free_propagate(s, delays[k], model, noise);
  }
  return expectation(model.mu(), s.op());
}

inline const Operator& part_of(const DipoleParts& parts, Part p) {
  return p == Part::raising ? parts.raising : parts.lowering;
}

inline const Operator& part_for_sign(const DipoleParts& parts, int sign) {
  return sign > 0 ? parts.raising : parts.lowering;
}

}  // namespace detail

/// S(n) at delays (t1, ..., tn) for input rho_in.
inline Complex response_function(int order, std::span<const double> delays,
                                 const ExcitonModel& model, const DephasingModel& noise,
                                 const LiouvilleVector& rho_in) {
  detail::check_delays(order, delays);
  std::vector<const Operator*> dipoles(static_cast<std::size_t>(order), &model.mu());
  return detail::vertex_chain(dipoles, delays, model, noise, rho_in);
}

/// All 4^n left/right x raising/lowering terms, in a fixed order.
inline std::vector<PathwayTerm> enumerate_pathways(int order) {
  check_order(order);
  std::vector<PathwayTerm> out;
  for (int sides = 0; sides < (1 << order); ++sides) {
    for (int parts = 0; parts < (1 << order); ++parts) {
      PathwayTerm term;
      std::vector<int> signs;
      for (int k = 0; k < order; ++k) {
        const Side side = (sides >> k) & 1 ? Side::right : Side::left;
        const Part part = (parts >> k) & 1 ? Part::lowering : Part::raising;
        term.steps.push_back({side, part});
        if (side == Side::right) term.sign = -term.sign;
        signs.push_back(part == Part::raising ? 1 : -1);
      }
      term.phase_signature = SignPattern(std::move(signs));
      out.push_back(std::move(term));
    }
  }
  return out;
}

/// Contribution of a single pathway term (including its commutator sign).
inline Complex evaluate_pathway(const PathwayTerm& term, std::span<const double> delays,
                                const ExcitonModel& model, const DephasingModel& noise,
                                const LiouvilleVector& rho_in) {
  const int order = static_cast<int>(term.steps.size());
  detail::check_delays(order, delays);
  const DipoleParts parts = split_dipole(model);
  const Complex minus_i(0.0, -1.0);
  Matrix s = rho_in.matrix();
  for (int k = 0; k < order; ++k) {
    const auto& step = term.steps[static_cast<std::size_t>(k)];
    const Matrix& d = detail::part_of(parts, step.part).matrix();
    s = step.side == Side::left ? Matrix(minus_i * (d * s)) : Matrix(-minus_i * (s * d));
    s = free_propagate(LiouvilleVector(Operator(s)), delays[static_cast<std::size_t>(k)], model,
                       noise)
            .matrix();
  }
  return expectation(model.mu(), Operator(s));
}

/// Terms that do not vanish identically for this model and input, judged
/// on the sparsity structure of mu+, mu- and rho_in.
inline std::vector<PathwayTerm> surviving_pathways(int order, const ExcitonModel& model,
                                                   const LiouvilleVector& rho_in) {
  const DipoleParts parts = split_dipole(model);
  using Pattern = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
  auto support = [](const Matrix& m) -> Pattern { return m.array() != Complex(0.0); };
  auto bool_product = [](const Pattern& a, const Pattern& b) {
    return Pattern((a.cast<int>() * b.cast<int>()).array() > 0);
  };
  const Pattern up = support(parts.raising.matrix());
  const Pattern down = support(parts.lowering.matrix());
  const Pattern mu = support(model.mu().matrix());
  const Pattern rho = support(rho_in.matrix());

  std::vector<PathwayTerm> out;
  for (auto& term : enumerate_pathways(order)) {
    Pattern s = rho;
    for (const auto& step : term.steps) {
      const Pattern& d = step.part == Part::raising ? up : down;
      s = step.side == Side::left ? bool_product(d, s) : bool_product(s, d);
    }
    // trace(mu s) = sum_ij mu_ji s_ij
    if ((mu.transpose().array() && s.array()).any()) out.push_back(std::move(term));
  }
  return out;
}

/// Phase-matched component of S(n) for one sign pattern.
inline Complex select_phase_matched(int order, const SignPattern& pattern,
                                    std::span<const double> delays, const ExcitonModel& model,
                                    const DephasingModel& noise, const LiouvilleVector& rho_in) {
  detail::check_delays(order, delays);
  if (pattern.arity() != order)
    throw InvalidArgument("pattern arity " + std::to_string(pattern.arity()) +
                          " does not match order " + std::to_string(order));
  const DipoleParts parts = split_dipole(model);
  std::vector<const Operator*> dipoles;
  for (int k = 0; k < order; ++k) dipoles.push_back(&detail::part_for_sign(parts, pattern[k]));
  return detail::vertex_chain(dipoles, delays, model, noise, rho_in);
}

enum class PulseMode { impulsive, finite };

/// One laser interaction.
struct PulseEvent {
  double arrival = 0.0;
  PulseMode mode = PulseMode::impulsive;
  double area = 1.0;
  double width = 0.0;    // Gaussian std-dev, finite mode only
  double carrier = 0.0;  // angular frequency
  int slot = 0;          // which k_j this pulse carries (1-based), 0 = positional

  static PulseEvent impulsive(double arrival, double area = 1.0, int slot = 0) {
    return {arrival, PulseMode::impulsive, area, 0.0, 0.0, slot};
  }
  static PulseEvent gaussian(double arrival, double area, double width, double carrier,
                             int slot = 0) {
    return {arrival, PulseMode::finite, area, width, carrier, slot};
  }
};

namespace detail {

inline void check_pulses(int order, std::span<const PulseEvent> pulses) {
  check_order(order);
  if (static_cast<int>(pulses.size()) != order)
    throw InvalidArgument("order " + std::to_string(order) + " needs " + std::to_string(order) +
                          " pulses");
  for (std::size_t k = 0; k < pulses.size(); ++k) {
    if (!std::isfinite(pulses[k].arrival) || !std::isfinite(pulses[k].area))
      throw InvalidArgument("pulse parameters must be finite");
    if (k > 0 && !(pulses[k].arrival > pulses[k - 1].arrival))
      throw InvalidArgument("pulse arrival times must be strictly increasing");
  }
}

}  // namespace detail

/// P(n) = (product of areas) x phase-matched S(n) at the arrival delays.
inline Complex polarization_impulsive(int order, std::span<const PulseEvent> pulses,
                                      double detection_time, const SignPattern& pattern,
                                      const ExcitonModel& model, const DephasingModel& noise,
                                      const LiouvilleVector& rho_in) {
  detail::check_pulses(order, pulses);
  double areas = 1.0;
  std::vector<double> delays;
  for (std::size_t k = 0; k < pulses.size(); ++k) {
    if (pulses[k].mode != PulseMode::impulsive)
      throw InvalidArgument("polarization_impulsive needs impulsive pulses");
    areas *= pulses[k].area;
    if (k > 0) delays.push_back(pulses[k].arrival - pulses[k - 1].arrival);
  }
  if (detection_time < pulses.back().arrival)
    throw InvalidArgument("detection time precedes the last pulse");
  delays.push_back(detection_time - pulses.back().arrival);
  return areas * select_phase_matched(order, pattern, delays, model, noise, rho_in);
}

inline constexpr double kEnvelopeCutoff = 5.0;  // widths
inline constexpr double kQuadratureTolerance = 1e-4;

namespace detail {

/// Analytic field of a pulse in a +/- slot: full Gaussian envelope times
/// exp(-i s carrier (t - arrival)); tends to area * delta as width -> 0.
inline Complex analytic_field(const PulseEvent& p, int sign, double t) {
  const double x = (t - p.arrival) / p.width;
  if (std::abs(x) > kEnvelopeCutoff) return 0.0;
  const double env = p.area / (p.width * std::sqrt(2.0 * std::numbers::pi)) * std::exp(-0.5 * x * x);
  return env * std::exp(Complex(0.0, -sign * p.carrier * (t - p.arrival)));
}

/// Midpoint rule for the time-ordered n-fold convolution on a uniform grid
/// ending at the detection time. The propagator factorises, so the n-fold
/// sum is accumulated with running partial sums X_1..X_n:
///   X_m(c_k) = G(h) X_m(c_{k-1}) + h E_m(c_k) V_m[G(h) X_{m-1}(c_{k-1})],
/// which enforces tau_1 < tau_2 < ... strictly. The input state is given at
/// the first pulse's arrival.
inline Complex convolved_midpoint(int order, std::span<const PulseEvent> pulses,
                                  double detection_time, const SignPattern& pattern,
                                  const ExcitonModel& model, const DephasingModel& noise,
                                  const LiouvilleVector& rho_in, double step) {
  const double start = pulses.front().arrival - kEnvelopeCutoff * pulses.front().width;
  if (detection_time <= start) return 0.0;
  const long cells = std::max(1L, static_cast<long>(std::ceil((detection_time - start) / step - 1e-9)));
  const double first_center = detection_time - (static_cast<double>(cells) - 0.5) * step;

  const DipoleParts parts = split_dipole(model);
  const Eigen::VectorXd eps = model.energies();
  const Matrix g_step = free_factors(eps, noise.rates(), step);
  const Complex minus_i(0.0, -1.0);

  std::vector<const Matrix*> dip;
  for (int m = 0; m < order; ++m) dip.push_back(&part_for_sign(parts, pattern[m]).matrix());

  Matrix rho = rho_in.matrix().cwiseProduct(
      free_factors(eps, noise.rates(), first_center - pulses.front().arrival));
  const int n = model.dim();
  std::vector<Matrix> x(static_cast<std::size_t>(order), Matrix::Zero(n, n));
  std::vector<Matrix> prop(static_cast<std::size_t>(order));

  for (long k = 0; k < cells; ++k) {
    const double c = first_center + static_cast<double>(k) * step;
    if (k > 0) rho = rho.cwiseProduct(g_step);
    for (int m = 0; m < order; ++m) prop[m] = k > 0 ? Matrix(x[m].cwiseProduct(g_step)) : x[m];
    for (int m = 0; m < order; ++m) {
      x[m] = prop[m];
      const Complex e = analytic_field(pulses[m], pattern[m], c);
      if (e == Complex(0.0)) continue;
      const Matrix& src = m == 0 ? rho : prop[m - 1];
      const Matrix& d = *dip[m];
      x[m] += (step * e * minus_i) * (d * src - src * d);
    }
  }
  const Matrix tail = free_factors(eps, noise.rates(), 0.5 * step);
  return expectation(model.mu(), Operator(x.back().cwiseProduct(tail)));
}

}  // namespace detail

/// Quadrature of the n-fold field convolution with the phase-matched
/// response, for finite Gaussian pulses. The result at step/2 is returned
/// after checking it agrees with the result at step.
inline Complex polarization_convolved(int order, std::span<const PulseEvent> pulses,
                                      double detection_time, const SignPattern& pattern,
                                      const ExcitonModel& model, const DephasingModel& noise,
                                      const LiouvilleVector& rho_in, double step) {
  detail::check_pulses(order, pulses);
  if (pattern.arity() != order)
    throw InvalidArgument("pattern arity does not match order");
  if (!(step > 0.0)) throw InvalidArgument("quadrature step must be positive");
  detail::check_model_noise(model, noise);
  double scale = 1.0;
  for (const auto& p : pulses) {
    if (p.mode != PulseMode::finite || !(p.width > 0.0))
      throw InvalidArgument("polarization_convolved needs finite pulses with positive width");
    scale *= std::abs(p.area);
  }
  const double mu_max = model.mu().matrix().cwiseAbs().maxCoeff();
  scale *= std::pow(mu_max, order + 1);

  const Complex coarse = detail::convolved_midpoint(order, pulses, detection_time, pattern, model,
                                                    noise, rho_in, step);
  const Complex fine = detail::convolved_midpoint(order, pulses, detection_time, pattern, model,
                                                  noise, rho_in, 0.5 * step);
  const double diff = std::abs(coarse - fine);
  if (diff > kQuadratureTolerance * std::abs(fine) && diff > 1e-14 * scale) {
    throw QuadratureError("quadrature step " + std::to_string(step) +
                          " too coarse: step-halving changes the result by " +
                          std::to_string(diff / std::max(std::abs(fine), 1e-300)) + " relative");
  }
  return fine;
}

}  // namespace nlw
