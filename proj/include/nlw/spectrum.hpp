#pragma once

// 2D spectra: discrete Fourier transform of a (t1, t3) grid of response
// samples at fixed t2.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "nlw/errors.hpp"
#include "nlw/operator.hpp"

namespace nlw {

struct ResponseSample {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  Complex value;
};

struct Spectrum2D {
  std::vector<double> omega1;
  std::vector<double> omega3;
  Matrix values;  // rows: omega1, cols: omega3
};

namespace detail {

inline constexpr double kGridTolerance = 1e-9;

/// Sorted distinct values; throws unless they form a uniform grid.
inline std::vector<double> uniform_axis(std::vector<double> v, const char* name) {
  std::sort(v.begin(), v.end());
  std::vector<double> axis;
  for (double t : v) {
    if (axis.empty() || std::abs(t - axis.back()) > kGridTolerance * std::max(1.0, std::abs(t)))
      axis.push_back(t);
  }
  if (axis.size() >= 3) {
    const double dt = axis[1] - axis[0];
    for (std::size_t i = 2; i < axis.size(); ++i) {
      if (std::abs((axis[i] - axis[i - 1]) - dt) > kGridTolerance * std::max(1.0, std::abs(dt)))
        throw InvalidArgument(std::string("non-uniform grid along ") + name);
    }
  }
  return axis;
}

inline std::size_t locate(const std::vector<double>& axis, double t) {
  const auto it = std::lower_bound(axis.begin(), axis.end(), t - kGridTolerance * std::max(1.0, std::abs(t)));
  return static_cast<std::size_t>(it - axis.begin());
}

/// Centred angular frequencies 2 pi k / (N dt), k = -floor(N/2) .. ceil(N/2)-1.
inline std::vector<double> frequency_axis(std::size_t n, double dt) {
  std::vector<double> w(n);
  const long half = static_cast<long>(n / 2);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 2.0 * std::numbers::pi * static_cast<double>(static_cast<long>(i) - half) /
           (static_cast<double>(n) * dt);
  return w;
}

}  // namespace detail

/// F(w1, w3) = sum S(t1, t3) exp(-i (w1 t1 + w3 t3)) dt1 dt3.
inline Spectrum2D spectrum_2d(std::span<const ResponseSample> samples) {
  if (samples.empty()) throw InvalidArgument("spectrum needs at least one sample");
  std::vector<double> t1s, t2s, t3s;
  for (const auto& s : samples) {
    t1s.push_back(s.t1);
    t2s.push_back(s.t2);
    t3s.push_back(s.t3);
  }
  const auto ax1 = detail::uniform_axis(t1s, "t1");
  const auto ax3 = detail::uniform_axis(t3s, "t3");
  if (detail::uniform_axis(t2s, "t2").size() != 1)
    throw InvalidArgument("spectrum needs a fixed t2");
  if (ax1.size() * ax3.size() != samples.size())
    throw InvalidArgument("samples do not form a complete (t1, t3) grid");

  Matrix grid = Matrix::Zero(static_cast<Eigen::Index>(ax1.size()), static_cast<Eigen::Index>(ax3.size()));
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(grid.rows(), grid.cols(), false);
  for (const auto& s : samples) {
    const auto i = static_cast<Eigen::Index>(detail::locate(ax1, s.t1));
    const auto j = static_cast<Eigen::Index>(detail::locate(ax3, s.t3));
    if (seen(i, j)) throw InvalidArgument("duplicate sample in (t1, t3) grid");
    seen(i, j) = true;
    grid(i, j) = s.value;
  }

  const double dt1 = ax1.size() > 1 ? ax1[1] - ax1[0] : 1.0;
  const double dt3 = ax3.size() > 1 ? ax3[1] - ax3[0] : 1.0;

  Spectrum2D out;
  out.omega1 = detail::frequency_axis(ax1.size(), dt1);
  out.omega3 = detail::frequency_axis(ax3.size(), dt3);

  auto kernel = [](const std::vector<double>& w, const std::vector<double>& t, double dt) {
    Matrix k(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(t.size()));
    for (std::size_t a = 0; a < w.size(); ++a)
      for (std::size_t b = 0; b < t.size(); ++b)
        k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            dt * std::exp(Complex(0.0, -w[a] * t[b]));
    return k;
  };
  const Matrix k1 = kernel(out.omega1, ax1, dt1);
  const Matrix k3 = kernel(out.omega3, ax3, dt3);
  out.values = k1 * grid * k3.transpose();
  return out;
}

}  // namespace nlw
