#pragma once

// Scalar root finding, 1-D minimization, quadrature and regression helpers
// shared by the solver modules.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <utility>

#include "frontlab/errors.hpp"

namespace frontlab::numerics {

inline constexpr double kInvPhi = 0.6180339887498949;  // 1/phi

struct Minimum {
  double x;
  double fx;
};

// Golden-section search for a unimodal function on [a, b].
template <class F>
Minimum golden_section(F&& f, double a, double b, double xtol, int max_iter = 200) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && std::abs(b - a) > xtol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? Minimum{c, fc} : Minimum{d, fd};
}

// Bisection on a sign change of f over [a, b]; returns the midpoint of the
// final bracket. Throws DomainError when f(a), f(b) share a sign.
template <class F>
double bisect(F&& f, double a, double b, double xtol = 0.0, int max_iter = 200) {
  double fa = f(a);
  const double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) throw DomainError("bisect: endpoints do not bracket a root");
  for (int it = 0; it < max_iter; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= std::min(a, b) || m >= std::max(a, b) || std::abs(b - a) <= xtol) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// Composite Gauss-Legendre quadrature of f over [a, b] with `panels` panels.
template <class F>
double gauss_legendre(F&& f, double a, double b, int panels = 16) {
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (std::size_t k = 0; k < kGaussNodes.size(); ++k)
      sum += kGaussWeights[k] * f(mid + 0.5 * h * kGaussNodes[k]);
  }
  return 0.5 * h * sum;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double residual_rms = 0.0;
};

// Ordinary least squares y ~ slope * x + intercept.
inline LinearFit linear_regression(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw WindowError("linear_regression: need >= 2 paired samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw WindowError("linear_regression: abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ssr += r * r;
  }
  fit.residual_rms = std::sqrt(ssr / static_cast<double>(n));
  fit.slope_stderr = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

}  // namespace frontlab::numerics
