#pragma once

// Exciton Hamiltonians in their eigenbasis: the coupled dimer, general
// n-site aggregates, and the classical input states built on them.
// Energies are angular frequencies with hbar = 1.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlw/errors.hpp"
#include "nlw/operator.hpp"

namespace nlw {

enum class Parity { even, odd };

struct DimerParams {
  double omega_a = 0.0;
  double omega_b = 0.0;
  double j_coupling = 0.0;
  double mu_a = 1.0;
  double mu_b = 1.0;
};

struct DimerSpectrum {
  double omega_bar = 0.0;  // (omega_a + omega_b) / 2
  double delta = 0.0;      // (omega_a - omega_b) / 2
  double theta = 0.0;      // mixing angle, (-pi/4, pi/4]
  double omega_alpha = 0.0;
  double omega_beta = 0.0;
  double omega_f = 0.0;
};

/// System Hamiltonian and dipole operator, both stored in the exciton
/// (energy) basis, so h0 is diagonal.
class ExcitonModel {
 public:
  ExcitonModel(Operator h0, Operator mu, std::vector<std::string> labels,
               std::optional<std::vector<Parity>> parity = std::nullopt)
      : h0_(std::move(h0)), mu_(std::move(mu)), labels_(std::move(labels)),
        parity_(std::move(parity)) {
    const int n = h0_.dim();
    Operator::check_same_dim(h0_, mu_);
    if (static_cast<int>(labels_.size()) != n)
      throw InvalidArgument("need one label per level");
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j)
        if (labels_[i] == labels_[j]) throw InvalidArgument("duplicate label " + labels_[i]);
    }
    if (!h0_.is_hermitian()) throw NotHermitian(h0_.hermiticity_error());
    if (!mu_.is_hermitian()) throw NotHermitian(mu_.hermiticity_error());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && h0_(i, j) != Complex(0.0))
          throw InvalidArgument("h0 must be diagonal in the exciton basis");
      }
      if (h0_(i, i).imag() != 0.0) throw InvalidArgument("h0 diagonal must be real");
    }
    if (parity_) {
      if (static_cast<int>(parity_->size()) != n)
        throw InvalidArgument("need one parity tag per level");
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if ((*parity_)[i] == (*parity_)[j] && mu_(i, j) != Complex(0.0))
            throw InvalidArgument("dipole couples levels of equal parity: " + labels_[i] +
                                  ", " + labels_[j]);
        }
      }
    }
  }

  int dim() const { return h0_.dim(); }
  const Operator& h0() const { return h0_; }
  const Operator& mu() const { return mu_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::optional<std::vector<Parity>>& parity() const { return parity_; }

  double energy(int level) const { return h0_(level, level).real(); }

  Eigen::VectorXd energies() const { return h0_.matrix().diagonal().real(); }

  int index_of(const std::string& label) const {
    for (int i = 0; i < dim(); ++i)
      if (labels_[i] == label) return i;
    throw InvalidArgument("unknown level label '" + label + "'");
  }

  /// Largest transition frequency |eps_i - eps_j|.
  double max_transition_frequency() const {
    const Eigen::VectorXd e = energies();
    return e.maxCoeff() - e.minCoeff();
  }

  /// Same Hamiltonian, dipole scaled; used for the mu = 0 limits.
  ExcitonModel with_dipole(Operator mu) const {
    return ExcitonModel(h0_, std::move(mu), labels_, parity_);
  }

 private:
  Operator h0_;
  Operator mu_;
  std::vector<std::string> labels_;
  std::optional<std::vector<Parity>> parity_;
};

/// Closed-form dimer spectrum. The upper single exciton is always labelled
/// alpha; Delta = 0 is the continuous limit theta = pi/4.
inline DimerSpectrum diagonalize_dimer(const DimerParams& p) {
  if (!(p.omega_a > 0.0) || !(p.omega_b > 0.0))
    throw InvalidArgument("site energies must be positive");
  if (p.omega_a == p.omega_b && p.j_coupling == 0.0)
    throw DegenerateModel("uncoupled dimer with equal site energies");

  DimerSpectrum s;
  s.omega_bar = 0.5 * (p.omega_a + p.omega_b);
  s.delta = 0.5 * (p.omega_a - p.omega_b);
  double split = 0.0;
  if (s.delta != 0.0) {
    s.theta = 0.5 * std::atan(p.j_coupling / s.delta);
    split = std::abs(s.delta / std::cos(2.0 * s.theta));
  } else {
    s.theta = std::numbers::pi / 4.0;
    split = std::abs(p.j_coupling);
  }
  s.omega_alpha = s.omega_bar + split;
  s.omega_beta = s.omega_bar - split;
  s.omega_f = p.omega_a + p.omega_b;
  return s;
}

namespace detail {

/// Site-basis dimer operators in the order (g, A, B, AB) with hard-core
/// chromophores: mu = mu_a (a_A + a_A^+) + mu_b (a_B + a_B^+).
inline Matrix dimer_site_dipole(const DimerParams& p) {
  Matrix mu = Matrix::Zero(4, 4);
  mu(1, 0) = mu(0, 1) = p.mu_a;  // g <-> A
  mu(2, 0) = mu(0, 2) = p.mu_b;  // g <-> B
  mu(3, 1) = mu(1, 3) = p.mu_b;  // A <-> AB
  mu(3, 2) = mu(2, 3) = p.mu_a;  // B <-> AB
  return mu;
}

}  // namespace detail

/// Four-level dimer in the exciton basis ordered (g, beta, alpha, f).
inline ExcitonModel build_dimer(const DimerParams& p) {
  const DimerSpectrum s = diagonalize_dimer(p);
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);

  // Rotated vector (cos, sin) has energy omega_bar + Delta sec 2theta (or
  // omega_bar + J at Delta = 0); it is alpha only when that is the upper one.
  const double rotated_energy =
      s.delta != 0.0 ? s.omega_bar + s.delta / std::cos(2.0 * s.theta) : s.omega_bar + p.j_coupling;
  Eigen::Vector2d alpha(c, sn);
  Eigen::Vector2d beta(-sn, c);
  if (rotated_energy < s.omega_bar) std::swap(alpha, beta);

  // Columns are exciton states in the site basis, block diagonal.
  Matrix rot = Matrix::Zero(4, 4);
  rot(0, 0) = 1.0;
  rot(1, 1) = beta(0);
  rot(2, 1) = beta(1);
  rot(1, 2) = alpha(0);
  rot(2, 2) = alpha(1);
  rot(3, 3) = 1.0;

  Matrix h0 = Matrix::Zero(4, 4);
  h0(1, 1) = s.omega_beta;
  h0(2, 2) = s.omega_alpha;
  h0(3, 3) = s.omega_f;

  Matrix mu = rot.adjoint() * detail::dimer_site_dipole(p) * rot;
  return ExcitonModel(Operator(h0), Operator(mu), {"g", "beta", "alpha", "f"},
                      std::vector<Parity>{Parity::even, Parity::odd, Parity::odd, Parity::even});
}

/// Ground state plus the single-exciton manifold of n coupled sites, and
/// for n = 2 optionally the doubly excited state. Single excitons are
/// labelled e1..en in ascending energy.
inline ExcitonModel build_general(const std::vector<double>& site_energies,
                                  const Eigen::MatrixXd& couplings,
                                  const std::vector<double>& dipoles,
                                  bool include_two_exciton = false) {
  const int n = static_cast<int>(site_energies.size());
  if (n == 0) throw InvalidArgument("need at least one site");
  if (couplings.rows() != n || couplings.cols() != n)
    throw InvalidArgument("coupling matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  if (static_cast<int>(dipoles.size()) != n) throw InvalidArgument("need one dipole per site");
  for (double e : site_energies)
    if (!(e > 0.0) || !std::isfinite(e)) throw InvalidArgument("site energies must be positive");
  for (int i = 0; i < n; ++i) {
    if (couplings(i, i) != 0.0) throw InvalidArgument("coupling matrix diagonal must be zero");
    for (int j = 0; j < n; ++j)
      if (couplings(i, j) != couplings(j, i))
        throw InvalidArgument("coupling matrix is not symmetric");
  }
  if (include_two_exciton && n != 2)
    throw InvalidArgument("two-exciton manifold is only built for n = 2");

  Eigen::MatrixXd single = couplings;
  for (int i = 0; i < n; ++i) single(i, i) = site_energies[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(single);
  const Eigen::VectorXd eps = solver.eigenvalues();
  const Eigen::MatrixXd vec = solver.eigenvectors();  // column k = exciton k in site basis

  const int dim = 1 + n + (include_two_exciton ? 1 : 0);
  Matrix h0 = Matrix::Zero(dim, dim);
  Matrix mu = Matrix::Zero(dim, dim);
  std::vector<std::string> labels{"g"};
  std::vector<Parity> parity{Parity::even};
  for (int k = 0; k < n; ++k) {
    h0(1 + k, 1 + k) = eps(k);
    double d = 0.0;
    for (int i = 0; i < n; ++i) d += vec(i, k) * dipoles[i];
    mu(1 + k, 0) = mu(0, 1 + k) = d;
    labels.push_back("e" + std::to_string(k + 1));
    parity.push_back(Parity::odd);
  }
  if (include_two_exciton) {
    const int f = 3;
    h0(f, f) = site_energies[0] + site_energies[1];
    for (int k = 0; k < 2; ++k) {
      // <AB| mu |k> = mu_B <A|k> + mu_A <B|k>
      const double d = vec(0, k) * dipoles[1] + vec(1, k) * dipoles[0];
      mu(f, 1 + k) = mu(1 + k, f) = d;
    }
    labels.push_back("f");
    parity.push_back(Parity::even);
  }
  return ExcitonModel(Operator(h0), Operator(mu), std::move(labels), std::move(parity));
}

/// Convex weights over exciton eigenstates.
class ClassicalMixture {
 public:
  explicit ClassicalMixture(Eigen::VectorXd populations, double tol = 1e-12)
      : p_(std::move(populations)) {
    if (p_.size() == 0) throw InvalidArgument("mixture must be non-empty");
    for (Eigen::Index i = 0; i < p_.size(); ++i)
      if (!(p_(i) >= 0.0) || !std::isfinite(p_(i)))
        throw InvalidArgument("mixture populations must be non-negative");
    if (std::abs(p_.sum() - 1.0) > tol) throw InvalidArgument("mixture populations must sum to 1");
  }

  const Eigen::VectorXd& populations() const { return p_; }
  int dim() const { return static_cast<int>(p_.size()); }

  DensityMatrix density() const {
    return validate_density(Operator(p_.cast<Complex>().asDiagonal().toDenseMatrix()));
  }

 private:
  Eigen::VectorXd p_;
};

/// Boltzmann populations exp(-beta eps)/Z; beta = +inf gives the ground state.
inline ClassicalMixture gibbs_populations(const ExcitonModel& model, double beta) {
  if (!(beta >= 0.0)) throw InvalidArgument("inverse temperature must be non-negative");
  const Eigen::VectorXd e = model.energies();
  const double e_min = e.minCoeff();
  Eigen::VectorXd w(e.size());
  if (std::isinf(beta)) {
    for (Eigen::Index i = 0; i < e.size(); ++i) w(i) = e(i) == e_min ? 1.0 : 0.0;
  } else {
    for (Eigen::Index i = 0; i < e.size(); ++i) w(i) = std::exp(-beta * (e(i) - e_min));
  }
  return ClassicalMixture(w / w.sum());
}

inline DensityMatrix gibbs_state(const ExcitonModel& model, double beta) {
  return gibbs_populations(model, beta).density();
}

inline DensityMatrix eigenstate(const ExcitonModel& model, const std::string& label) {
  return validate_density(Operator::projector(model.dim(), model.index_of(label)));
}

}  // namespace nlw
