#pragma once

// Evolution between and during pulses, in the exciton eigenbasis.
//
// Between pulses the damped master equation is diagonal,
//   d sigma_ij / dt = -i (eps_i - eps_j) sigma_ij - gamma_ij sigma_ij,
// and is solved element-wise in closed form. nonperturbative_evolve()
// integrates the full driven equation with fixed-step RK4 and is the
// reference the perturbative machinery is checked against.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "nlw/errors.hpp"
#include "nlw/exciton_model.hpp"
#include "nlw/operator.hpp"

namespace nlw {

/// Symmetric, non-negative dephasing rates gamma_ij. Zero diagonal unless
/// population decay was requested explicitly.
class DephasingModel {
 public:
  explicit DephasingModel(Eigen::MatrixXd gamma) : gamma_(std::move(gamma)) {
    if (gamma_.rows() != gamma_.cols()) throw InvalidArgument("gamma must be square");
    for (Eigen::Index i = 0; i < gamma_.rows(); ++i) {
      for (Eigen::Index j = 0; j < gamma_.cols(); ++j) {
        if (!(gamma_(i, j) >= 0.0) || !std::isfinite(gamma_(i, j)))
          throw InvalidArgument("dephasing rates must be finite and non-negative");
        if (gamma_(i, j) != gamma_(j, i)) throw InvalidArgument("gamma must be symmetric");
      }
    }
  }

  static DephasingModel none(int dim) { return DephasingModel(Eigen::MatrixXd::Zero(dim, dim)); }

  /// Same rate on every coherence; populations untouched unless
  /// population_decay is set, in which case the diagonal decays too.
  static DephasingModel uniform(int dim, double rate, bool population_decay = false) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Constant(dim, dim, rate);
    if (!population_decay) g.diagonal().setZero();
    return DephasingModel(std::move(g));
  }

  int dim() const { return static_cast<int>(gamma_.rows()); }
  const Eigen::MatrixXd& rates() const { return gamma_; }
  double rate(int i, int j) const { return gamma_(i, j); }
  bool has_population_decay() const { return gamma_.diagonal().cwiseAbs().maxCoeff() > 0.0; }

 private:
  Eigen::MatrixXd gamma_;
};

namespace detail {

inline void check_model_noise(const ExcitonModel& model, const DephasingModel& noise) {
  if (model.dim() != noise.dim()) throw DimensionMismatch(model.dim(), noise.dim());
}

/// exp(-i (eps_i - eps_j) dt - gamma_ij dt); dt may be negative (inverse map).
inline Matrix free_factors(const Eigen::VectorXd& eps, const Eigen::MatrixXd& gamma, double dt) {
  const Eigen::Index n = eps.size();
  Matrix f(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      f(i, j) = std::exp(Complex(-gamma(i, j) * dt, -(eps(i) - eps(j)) * dt));
  return f;
}

}  // namespace detail

inline LiouvilleVector free_propagate(const LiouvilleVector& state, double dt,
                                      const ExcitonModel& model, const DephasingModel& noise) {
  if (dt < 0.0) throw InvalidArgument("free propagation needs dt >= 0");
  detail::check_model_noise(model, noise);
  Operator::check_same_dim(state.op(), model.h0());
  if (dt == 0.0) return state;
  const Matrix f = detail::free_factors(model.energies(), noise.rates(), dt);
  return LiouvilleVector(Operator(state.matrix().cwiseProduct(f)));
}

/// One perturbative vertex, -i [dipole, state] (hbar = 1).
inline LiouvilleVector apply_vertex(const LiouvilleVector& state, const Operator& dipole) {
  return LiouvilleVector(Complex(0.0, -1.0) * commutator(dipole, state.op()));
}

inline LiouvilleVector apply_impulsive_interaction(const LiouvilleVector& state,
                                                   const ExcitonModel& model) {
  return apply_vertex(state, model.mu());
}

/// Real classical field E(t), zero outside [t_min, t_max].
struct FieldProfile {
  std::function<double(double)> amplitude;
  double t_min = 0.0;
  double t_max = 0.0;

  double operator()(double t) const {
    if (t < t_min || t > t_max || !amplitude) return 0.0;
    return amplitude(t);
  }

  static FieldProfile zero() { return {[](double) { return 0.0; }, 0.0, 0.0}; }
};

/// Gaussian pulse area/(w sqrt(2 pi)) exp(-(t-t0)^2/2w^2) cos(carrier (t-t0) + phase),
/// truncated at +-cutoff widths.
inline FieldProfile gaussian_pulse_field(double arrival, double area, double width,
                                         double carrier, double phase = 0.0,
                                         double cutoff = 5.0) {
  if (!(width > 0.0)) throw InvalidArgument("pulse width must be positive");
  const double norm = area / (width * std::sqrt(2.0 * std::numbers::pi));
  return {[=](double t) {
            const double x = (t - arrival) / width;
            return norm * std::exp(-0.5 * x * x) * std::cos(carrier * (t - arrival) + phase);
          },
          arrival - cutoff * width, arrival + cutoff * width};
}

/// Sum of fields; the support is the hull of the parts.
inline FieldProfile sum_fields(std::vector<FieldProfile> parts) {
  if (parts.empty()) return FieldProfile::zero();
  double lo = parts.front().t_min;
  double hi = parts.front().t_max;
  for (const auto& p : parts) {
    lo = std::min(lo, p.t_min);
    hi = std::max(hi, p.t_max);
  }
  return {[parts = std::move(parts)](double t) {
            double e = 0.0;
            for (const auto& p : parts) e += p(t);
            return e;
          },
          lo, hi};
}

struct EvolveOptions {
  double step = 0.0;  // <= 0 selects default_step(model)
  double t_start = 0.0;
  double t_end = 0.0;
  int record_every = 1;  // keep every k-th step (start and end always kept)
};

struct TrajectoryPoint {
  double time = 0.0;
  Operator state;
};

using Trajectory = std::vector<TrajectoryPoint>;

/// (2 pi / omega_max) / 50
inline double default_step(const ExcitonModel& model) {
  const double w = model.max_transition_frequency();
  if (w <= 0.0) return 0.1;
  return (2.0 * std::numbers::pi / w) / 50.0;
}

/// Fixed-step fourth-order integration of
///   d sigma/dt = -i [h0 + mu E(t), sigma] - gamma o sigma
/// in the interaction picture of the diagonal free part.
inline Trajectory nonperturbative_evolve(const DensityMatrix& rho0, const FieldProfile& field,
                                         const ExcitonModel& model, const DephasingModel& noise,
                                         const EvolveOptions& opt) {
  detail::check_model_noise(model, noise);
  Operator::check_same_dim(rho0.op(), model.h0());
  const double h_req = opt.step > 0.0 ? opt.step : default_step(model);
  const double span = opt.t_end - opt.t_start;
  if (span < 0.0) throw InvalidArgument("t_end must not precede t_start");
  if (opt.record_every < 1) throw InvalidArgument("record_every must be >= 1");

  const long steps = span == 0.0 ? 0 : std::max(1L, static_cast<long>(std::ceil(span / h_req - 1e-9)));
  const double h = steps == 0 ? 0.0 : span / static_cast<double>(steps);

  const Eigen::VectorXd eps = model.energies();
  const Matrix g_half = detail::free_factors(eps, noise.rates(), 0.5 * h);
  const Matrix g_full = detail::free_factors(eps, noise.rates(), h);
  const Matrix& mu = model.mu().matrix();
  const Complex minus_i(0.0, -1.0);
  auto drive = [&](double t, const Matrix& s) -> Matrix {
    const double e = field(t);
    if (e == 0.0) return Matrix::Zero(s.rows(), s.cols());
    return (minus_i * e) * (mu * s - s * mu);
  };

  const bool check_trace = !noise.has_population_decay();
  const Complex trace0 = rho0.matrix().trace();
  const double norm0 = rho0.matrix().norm();
  constexpr double kDriftLimit = 1e-8;

  Trajectory out;
  out.push_back({opt.t_start, rho0.op()});
  Matrix s = rho0.matrix();
  for (long k = 0; k < steps; ++k) {
    // Lawson RK4: the free part is applied exactly, RK4 handles mu E(t).
    const double t = opt.t_start + static_cast<double>(k) * h;
    const Matrix s_half = s.cwiseProduct(g_half);
    const Matrix k1 = drive(t, s);
    const Matrix k2 = drive(t + 0.5 * h, (s + (0.5 * h) * k1).cwiseProduct(g_half));
    const Matrix k3 = drive(t + 0.5 * h, s_half + (0.5 * h) * k2);
    const Matrix k4 = drive(t + h, s.cwiseProduct(g_full) + h * k3.cwiseProduct(g_half));
    s = (s + (h / 6.0) * k1).cwiseProduct(g_full) +
        (h / 3.0) * (k2 + k3).cwiseProduct(g_half) + (h / 6.0) * k4;

    if (!s.allFinite()) throw StepSizeError("integration diverged; reduce the step");
    if (check_trace && std::abs(s.trace() - trace0) > kDriftLimit)
      throw StepSizeError("trace drift exceeds 1e-8; reduce the step");
    if (s.norm() > norm0 * (1.0 + kDriftLimit))
      throw StepSizeError("state norm grows; step is outside the RK4 stability region");

    const bool last = k + 1 == steps;
    if (last || (k + 1) % opt.record_every == 0)
      out.push_back({last ? opt.t_end : t + h, Operator(s)});
  }
  return out;
}

}  // namespace nlw
