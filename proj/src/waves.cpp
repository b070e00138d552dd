#include "frontlab/waves.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "frontlab/cauchy.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/numerics.hpp"

namespace frontlab {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::size_t cell_of(const std::vector<double>& xi, double x) {
  const double h = xi[1] - xi[0];
  const auto n = xi.size();
  auto i = static_cast<std::size_t>(std::clamp(std::floor((x - xi[0]) / h), 0.0, static_cast<double>(n - 2)));
  return i;
}

// Translate xi so that W crosses 1/2 at pin_xi.
void pin_profile(WaveProfile& p, double pin_xi) {
  std::size_t k = 0;
  while (k + 1 < p.W.size() && p.W[k + 1] >= 0.5) ++k;
  if (k + 1 >= p.W.size()) throw FrontAbsent("profile never crosses 1/2");
  double a = p.xi[k], b = p.xi[k + 1];
  const double x_half = numerics::bisect([&](double x) { return p.value(x) - 0.5; }, a, b, 0.0, 200);
  const double shift = pin_xi - x_half;
  for (auto& x : p.xi) x += shift;
}

// ---------------------------------------------------------------- nonlocal

struct NonlocalDisc {
  std::vector<double> w;  // convolution weights, index k + m
  int m = 0;
  int n = 0;
  double dx = 0.0;
  double c = 0.0;
  double s = 0.0;
  const FamilySpec* family = nullptr;
};

// Fourth-order upwind-biased first derivative on offsets -1..3, times 12 dx.
constexpr double kUpwind[5] = {-3.0, -10.0, 18.0, -6.0, 1.0};

// Composite Simpson weights J(k dx) dx on [-L, L], normalized to unit mass.
// Falls back to the trapezoid weights when the support is not an even number of cells
// on each side.
std::vector<double> simpson_weights(const KernelSpec& kernel, double dx) {
  std::vector<double> w = convolution_weights(kernel, dx);
  const int m = static_cast<int>(w.size() / 2);
  if (m % 2 != 0 || kernel.kind() == KernelKind::Tabulated ||
      std::abs(m * dx - kernel.L()) > 1e-9 * kernel.L())
    return w;
  double mass = 0.0;
  for (int k = -m; k <= m; ++k) {
    const int j = k + m;  // 0..2m
    const double coef = (j == 0 || j == 2 * m) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    w[static_cast<std::size_t>(j)] = coef * kernel.density(k * dx) * dx / 3.0;
    mass += w[static_cast<std::size_t>(j)];
  }
  for (auto& v : w) v /= mass;
  return w;
}

// Ghost closure: 1 left of the domain, exponential extrapolation on the right.
struct Closure {
  double r = 0.0;
  bool active = false;  // derivative of r is used only when r is unclamped
};

Closure right_closure(const std::vector<double>& W) {
  const double a = W[W.size() - 1], b = W[W.size() - 2];
  Closure cl;
  if (a > 0.0 && b > 0.0 && a < b) {
    cl.r = a / b;
    cl.active = true;
  }
  return cl;
}

double ghost(const std::vector<double>& W, int j, const Closure& cl) {
  const int n = static_cast<int>(W.size());
  if (j < 0) return 1.0;
  if (j < n) return W[static_cast<std::size_t>(j)];
  return W[static_cast<std::size_t>(n - 1)] * std::pow(cl.r, j - n + 1);
}

// conv_i - W_i + speed * D_i + f(W_i)
std::vector<double> nonlocal_operator(const NonlocalDisc& d, const std::vector<double>& W, double speed,
                                      std::vector<double>* upwind = nullptr) {
  const Closure cl = right_closure(W);
  std::vector<double> F(static_cast<std::size_t>(d.n));
  if (upwind) upwind->assign(static_cast<std::size_t>(d.n), 0.0);
  for (int i = 0; i < d.n; ++i) {
    double conv = 0.0;
    for (int k = -d.m; k <= d.m; ++k) conv += d.w[static_cast<std::size_t>(k + d.m)] * ghost(W, i + k, cl);
    double D = 0.0;
    for (int k = 0; k < 5; ++k) D += kUpwind[k] * ghost(W, i + k - 1, cl);
    D /= 12.0 * d.dx;
    const double wi = W[static_cast<std::size_t>(i)];
    F[static_cast<std::size_t>(i)] = conv - wi + speed * D + d.family->f(wi, d.s);
    if (upwind) (*upwind)[static_cast<std::size_t>(i)] = D;
  }
  return F;
}

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_ghost_entry(Triplets& t, int i, int j, double coef, const std::vector<double>& W, const Closure& cl) {
  const int n = static_cast<int>(W.size());
  if (j < 0) return;
  if (j < n) {
    t.emplace_back(i, j, coef);
    return;
  }
  if (!cl.active) return;
  const int p = j - n + 1;
  t.emplace_back(i, n - 1, coef * (p + 1) * std::pow(cl.r, p));
  t.emplace_back(i, n - 2, -coef * p * std::pow(cl.r, p + 1));
}

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::string to_string(WaveMode mode) { return mode == WaveMode::Local ? "local" : "nonlocal"; }

std::string to_string(FrontKind kind) {
  switch (kind) {
    case FrontKind::Pulled:
      return "Pulled";
    case FrontKind::Transition:
      return "Transition";
    case FrontKind::Pushed:
      return "Pushed";
    case FrontKind::Supercritical:
      return "Supercritical";
  }
  return "?";
}

FrontKind front_kind_from_string(const std::string& name) {
  for (auto k : {FrontKind::Pulled, FrontKind::Transition, FrontKind::Pushed, FrontKind::Supercritical})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown front class '" + name + "'");
}

double WaveProfile::value(double x) const {
  if (x <= xi.front()) {
    const double gap = 1.0 - W.front();
    if (gap <= 0.0) return 1.0;
    return 1.0 - gap * std::exp(-dW.front() / gap * (x - xi.front()));
  }
  if (x >= xi.back()) {
    if (W.back() <= 0.0) return 0.0;
    return W.back() * std::exp(dW.back() / W.back() * (x - xi.back()));
  }
  const std::size_t i = cell_of(xi, x);
  const double h = xi[i + 1] - xi[i];
  const double t = (x - xi[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * W[i] + (t3 - 2 * t2 + t) * h * dW[i] + (-2 * t3 + 3 * t2) * W[i + 1] +
         (t3 - t2) * h * dW[i + 1];
}

double WaveProfile::gap(double x) const {
  if (x <= xi.front()) {
    const double g0 = 1.0 - W.front();
    if (g0 <= 0.0) return 0.0;
    return g0 * std::exp(-dW.front() / g0 * (x - xi.front()));
  }
  return 1.0 - value(x);
}

double WaveProfile::derivative(double x) const {
  if (x <= xi.front()) {
    const double gap = 1.0 - W.front();
    if (gap <= 0.0) return 0.0;
    const double rate = -dW.front() / gap;
    return -gap * rate * std::exp(rate * (x - xi.front()));
  }
  if (x >= xi.back()) {
    if (W.back() <= 0.0) return 0.0;
    const double k = dW.back() / W.back();
    return W.back() * k * std::exp(k * (x - xi.back()));
  }
  const std::size_t i = cell_of(xi, x);
  const double h = xi[i + 1] - xi[i];
  const double t = (x - xi[i]) / h;
  const double t2 = t * t;
  return (6 * t2 - 6 * t) / h * W[i] + (3 * t2 - 4 * t + 1) * dW[i] + (-6 * t2 + 6 * t) / h * W[i + 1] +
         (3 * t2 - 2 * t) * dW[i + 1];
}

// ------------------------------------------------------------------- local

WaveOutcome solve_wave_local(const FamilySpec& family, double s, double c, const ShootingOptions& opts) {
  const double g0 = family.gamma0();
  const double c_lin = 2.0 * std::sqrt(g0);
  if (c < c_lin - 1e-9)
    throw PreconditionError("wave speed c = " + fmt(c) + " is below the minimal-speed bound 2 sqrt(gamma0) = " +
                            fmt(c_lin));
  const double f1 = family.df(1.0, s);
  if (!(f1 < 0.0)) throw AssumptionViolation("f'(1;s) = " + fmt(f1) + " must be negative");
  const double mu = mu_root(KernelSpec::local(), f1, c);

  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;
  auto rhs = [&](const State& x, State& dxdt, double) {
    dxdt[0] = x[1];
    dxdt[1] = -c * x[1] - family.f(x[0], s);
  };
  auto stepper = odeint::make_dense_output(opts.atol, opts.rtol, odeint::runge_kutta_dopri5<State>());
  const State start{1.0 - opts.offset, -mu * opts.offset};
  stepper.initialize(start, 0.0, 0.1 * opts.h_out);

  WaveProfile p;
  p.c = c;
  p.s = s;
  p.mode = WaveMode::Local;
  p.family = family;
  p.kernel = KernelSpec::local();
  p.tolerance = opts.residual_tol;
  p.xi.push_back(0.0);
  p.W.push_back(start[0]);
  p.dW.push_back(start[1]);

  auto reject = [&](double xi, const State& x) -> std::optional<std::string> {
    if (x[0] < -1e-12) return "trajectory crosses W = 0 at xi = " + fmt(xi) + " (W' = " + fmt(x[1]) + ")";
    if (x[1] >= 0.0) return "trajectory turns (W' >= 0) at xi = " + fmt(xi) + ", W = " + fmt(x[0]);
    return std::nullopt;
  };

  long steps = 0;
  std::size_t k = 1;
  bool reached = false;
  State x;
  while (!reached) {
    if (++steps > opts.max_steps)
      throw InconclusiveError("shooting exceeded " + std::to_string(opts.max_steps) + " steps at c = " + fmt(c));
    const auto [ta, tb] = stepper.do_step(rhs);
    (void)ta;
    for (double t = k * opts.h_out; t <= tb; t = (++k) * opts.h_out) {
      stepper.calc_state(t, x);
      if (auto why = reject(t, x)) return WaveOutcome{std::nullopt, *why};
      p.xi.push_back(t);
      p.W.push_back(x[0]);
      p.dW.push_back(x[1]);
      if (x[0] <= opts.w_end) reached = true;
    }
    const State& cur = stepper.current_state();
    if (auto why = reject(tb, cur)) return WaveOutcome{std::nullopt, *why};
    if (cur[0] <= opts.w_end) reached = true;
  }
  // Near the origin W ~ a e^{-lambda_- xi} + b e^{-lambda_+ xi} (or (a + b xi) e^{-lambda0 xi});
  // V + lambda_+ W isolates the slow coefficient, whose sign decides a later zero crossing.
  {
    const auto [lm, lp] = lambda_roots(KernelSpec::local(), g0, std::max(c, c_lin));
    (void)lm;
    const double w = p.W.back(), v = p.dW.back();
    if (v + lp * w < -opts.mode_slack * lp * w)
      return WaveOutcome{std::nullopt, "slow-mode coefficient is negative at W = " + fmt(w) +
                                           " (trajectory would cross W = 0)"};
  }
  p.iterations = static_cast<int>(steps);
  pin_profile(p, opts.pin_xi);
  p.residual = profile_residual(p);
  if (p.residual > opts.residual_tol)
    throw InconclusiveError("shooting profile residual " + fmt(p.residual) + " exceeds tolerance " +
                            fmt(opts.residual_tol) + "; refine h_out or rtol");
  return WaveOutcome{std::move(p), {}};
}

double minimal_speed_local(const FamilySpec& family, double s, double tol, const ShootingOptions& opts) {
  if (tol < 1e-8) throw PreconditionError("minimal_speed_local: tol must be >= 1e-8");
  const double c_lin = 2.0 * std::sqrt(family.gamma0());
  auto admissible = [&](double c) { return static_cast<bool>(solve_wave_local(family, s, c, opts)); };
  if (admissible(c_lin)) return c_lin;
  double lo = c_lin, step = 0.05 * c_lin, hi = c_lin + step;
  while (!admissible(hi)) {
    lo = hi;
    step *= 2.0;
    hi = c_lin + step;
    if (hi > 10.0 * c_lin)
      throw AssumptionViolation("no admissible wave speed below 10 * 2 sqrt(gamma0); check the family");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (admissible(mid) ? hi : lo) = mid;
  }
  return hi;
}

// ---------------------------------------------------------------- nonlocal

WaveProfile solve_wave_nonlocal(const FamilySpec& family, double q, double c, const KernelSpec& kernel,
                                const NewtonOptions& opts) {
  if (kernel.is_local()) throw PreconditionError("solve_wave_nonlocal needs a nonlocal kernel");
  if (opts.cells_per_support < 8)
    throw PreconditionError("kernel support must be resolved by at least 8 cells (got " +
                            std::to_string(opts.cells_per_support) + ")");
  const SpectralData sd = linear_speed(kernel, family.gamma0());
  if (c < sd.c0_star - 1e-9)
    throw PreconditionError("wave speed c = " + fmt(c) + " is below the linear speed c0* = " + fmt(sd.c0_star));
  const double f1 = family.df(1.0, q);
  if (!(f1 < 0.0)) throw AssumptionViolation("f'(1;q) = " + fmt(f1) + " must be negative");
  const double mu = mu_root(kernel, f1, c);
  const double lam_minus = lambda_roots(kernel, family.gamma0(), std::max(c, sd.c0_star)).first;

  NonlocalDisc d;
  d.dx = kernel.L() / opts.cells_per_support;
  d.w = simpson_weights(kernel, d.dx);
  d.m = static_cast<int>(d.w.size() / 2);
  d.c = c;
  d.s = q;
  d.family = &family;
  const int kl = static_cast<int>(std::ceil(opts.tail_span / mu / d.dx));
  const int kr = static_cast<int>(std::ceil(opts.tail_span / lam_minus / d.dx));
  d.n = kl + kr + 1;
  const int pin = kl;
  const double x0 = opts.pin_xi - kl * d.dx;

  std::vector<double> W(static_cast<std::size_t>(d.n));
  for (int i = 0; i < d.n; ++i) {
    const double x = x0 + i * d.dx;
    W[static_cast<std::size_t>(i)] = opts.initial_guess ? opts.initial_guess->value(x)
                                                        : 1.0 / (1.0 + std::exp(sd.lambda0 * (x - opts.pin_xi)));
  }
  W[static_cast<std::size_t>(pin)] = 0.5;
  double theta = 0.0;

  // F(W) = 0 on all nodes plus the pin overdetermines W by one equation; a slack
  // theta on the last row absorbs the truncation defect of the right closure.
  auto bordered = [&](const std::vector<double>& w, double th) {
    std::vector<double> G = nonlocal_operator(d, w, c);
    G.back() += th;
    G.push_back(w[static_cast<std::size_t>(pin)] - 0.5);
    return G;
  };

  std::vector<double> G = bordered(W, theta);
  // The tail carries values far below newton_tol, so convergence is also required
  // relative to the local magnitude of W.
  auto relative_norm = [&](const std::vector<double>& g, const std::vector<double>& w) {
    double r = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) r = std::max(r, std::abs(g[i]) / std::max(std::abs(w[i]), 1e-300));
    return r;
  };
  std::vector<double> history{sup_norm(G)};
  int it = 0, polish = 0;
  const int N = d.n + 1;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  while (history.back() > opts.newton_tol || (relative_norm(G, W) > 1e-8 && polish++ < 8)) {
    if (it >= opts.max_iterations)
      throw NonconvergenceError("nonlocal Newton: no convergence in " + std::to_string(it) +
                                " iterations (residual " + fmt(history.back()) + ")");
    if (it >= 20 && history.back() > 1e-2 * history[history.size() - 21])
      throw NonconvergenceError("nonlocal Newton stagnated at residual " + fmt(history.back()) + " (c = " +
                                fmt(c) + ")");
    ++it;
    const Closure cl = right_closure(W);
    const double sp = c / (12.0 * d.dx);
    Triplets t;
    t.reserve(static_cast<std::size_t>(d.n) * (2 * d.m + 8));
    for (int i = 0; i < d.n; ++i) {
      for (int k = -d.m; k <= d.m; ++k) add_ghost_entry(t, i, i + k, d.w[static_cast<std::size_t>(k + d.m)], W, cl);
      t.emplace_back(i, i, -1.0 + family.df(W[static_cast<std::size_t>(i)], q));
      for (int k = 0; k < 5; ++k) add_ghost_entry(t, i, i + k - 1, kUpwind[k] * sp, W, cl);
    }
    t.emplace_back(d.n - 1, d.n, 1.0);
    t.emplace_back(d.n, pin, 1.0);
    Eigen::SparseMatrix<double> J(N, N);
    J.setFromTriplets(t.begin(), t.end());
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw NonconvergenceError("nonlocal Newton: singular Jacobian");
    Eigen::VectorXd rhs(N);
    for (int i = 0; i < N; ++i) rhs[i] = -G[static_cast<std::size_t>(i)];
    const Eigen::VectorXd delta = lu.solve(rhs);

    double alpha = 1.0;
    std::vector<double> Wt(W.size()), Gt;
    double thetat = theta;
    for (;;) {
      for (std::size_t i = 0; i < W.size(); ++i) Wt[i] = W[i] + alpha * delta[static_cast<Eigen::Index>(i)];
      thetat = theta + alpha * delta[d.n];
      Gt = bordered(Wt, thetat);
      if (polish > 0 || sup_norm(Gt) <= (1.0 - 1e-4 * alpha) * history.back() || alpha < 1.0 / 1024) break;
      alpha *= 0.5;
    }
    W.swap(Wt);
    G.swap(Gt);
    theta = thetat;
    history.push_back(sup_norm(G));
  }

  WaveProfile p;
  p.c = c;
  p.s = q;
  p.mode = WaveMode::Nonlocal;
  p.family = family;
  p.kernel = kernel;
  p.tolerance = opts.residual_tol;
  p.iterations = it;
  p.xi.resize(W.size());
  for (int i = 0; i < d.n; ++i) p.xi[static_cast<std::size_t>(i)] = x0 + i * d.dx;
  // W' from the equation itself: c W' = -(J*W - W + f(W))
  const std::vector<double> F0 = nonlocal_operator(d, W, 0.0);
  p.dW.resize(W.size());
  for (std::size_t i = 0; i < W.size(); ++i) p.dW[i] = -F0[i] / c;
  p.W = std::move(W);

  // strict positivity down to the tail test level, numerical zero beyond it
  std::size_t deep = 0;
  while (deep + 1 < p.W.size() && p.W[deep] > opts.mode_level) ++deep;
  for (std::size_t i = 0; i < p.W.size(); ++i) {
    const bool positive = i <= deep ? p.W[i] > 0.0 : p.W[i] >= -1e-12;
    if (!positive || p.W[i] > 1.0 + 1e-10)
      throw InadmissibleProfile("nonlocal profile leaves (0, 1] at xi = " + fmt(p.xi[i]) + " (W = " + fmt(p.W[i]) +
                                ", c = " + fmt(c) + ")");
    if (i > 0 && p.W[i] > p.W[i - 1] + 1e-10)
      throw InadmissibleProfile("nonlocal profile is not monotone at xi = " + fmt(p.xi[i]) + " (c = " + fmt(c) + ")");
  }
  if (p.W.front() < 1.0 - 1e-4 || p.W.back() > 1e-6)
    throw InadmissibleProfile("nonlocal profile does not reach its limits on the domain (W(left) = " +
                              fmt(p.W.front()) + ", W(right) = " + fmt(p.W.back()) + ")");
  // A local decay rate above lambda_+ means a negative slow-mode coefficient: the
  // profile would cross zero beyond the truncated domain.
  {
    const double lam_plus = lambda_roots(kernel, family.gamma0(), std::max(c, sd.c0_star)).second;
    std::size_t i = 0;
    while (i + 1 < p.W.size() && p.W[i] > opts.mode_level) ++i;
    const double kappa = -p.dW[i] / p.W[i];
    if (kappa > lam_plus * (1.0 + opts.mode_slack))
      throw InadmissibleProfile("tail decays faster than lambda_+ at W = " + fmt(p.W[i]) + " (rate " + fmt(kappa) +
                                " > " + fmt(lam_plus) + "); the profile would cross zero");
  }
  p.residual = profile_residual(p);
  if (p.residual > opts.residual_tol)
    throw NonconvergenceError("nonlocal profile residual " + fmt(p.residual) + " exceeds tolerance " +
                              fmt(opts.residual_tol) + " (boundary slack " + fmt(theta) + ")");
  return p;
}

MinimalWave minimal_wave_nonlocal(const FamilySpec& family, double q, const KernelSpec& kernel, double tol,
                                  const NewtonOptions& opts) {
  if (!(tol > 0.0)) throw PreconditionError("minimal_speed_nonlocal: tol must be positive");
  const double c_lin = linear_speed(kernel, family.gamma0()).c0_star;
  std::optional<WaveProfile> best, last;
  auto admissible = [&](double c) {
    NewtonOptions o = opts;
    if (best) o.initial_guess = &*best;
    else if (last) o.initial_guess = &*last;
    try {
      last = solve_wave_nonlocal(family, q, c, kernel, o);
    } catch (const NonconvergenceError&) {
      if (!o.initial_guess) return false;
      // retry from the default guess before declaring the speed inadmissible
      o.initial_guess = nullptr;
      try {
        last = solve_wave_nonlocal(family, q, c, kernel, o);
      } catch (const NonconvergenceError&) {
        return false;
      }
    }
    best = last;
    return true;
  };
  auto result = [&](double c) { return MinimalWave{c, std::move(*best)}; };
  if (admissible(c_lin)) return result(c_lin);
  double lo = c_lin, step = 0.05 * c_lin, hi = c_lin + step;
  while (!admissible(hi)) {
    lo = hi;
    step *= 2.0;
    hi = c_lin + step;
    if (hi > 10.0 * c_lin)
      throw AssumptionViolation("no admissible nonlocal wave speed below 10 c0*; check the family");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (admissible(mid) ? hi : lo) = mid;
  }
  return result(hi);
}

double minimal_speed_nonlocal(const FamilySpec& family, double q, const KernelSpec& kernel, double tol,
                              const NewtonOptions& opts) {
  return minimal_wave_nonlocal(family, q, kernel, tol, opts).c;
}

MinimalWave minimal_wave(const FamilySpec& family, double s, const KernelSpec& kernel, double tol) {
  if (!kernel.is_local()) return minimal_wave_nonlocal(family, s, kernel, tol);
  const double c = minimal_speed_local(family, s, std::max(tol, 1e-8));
  return MinimalWave{c, solve_wave(family, s, c, kernel)};
}

double minimal_speed(const FamilySpec& family, double s, const KernelSpec& kernel, double tol) {
  if (kernel.is_local()) return minimal_speed_local(family, s, std::max(tol, 1e-8));
  return minimal_speed_nonlocal(family, s, kernel, tol);
}

WaveProfile solve_wave(const FamilySpec& family, double s, double c, const KernelSpec& kernel) {
  if (!kernel.is_local()) return solve_wave_nonlocal(family, s, c, kernel);
  auto out = solve_wave_local(family, s, c);
  if (!out) throw InadmissibleProfile("no admissible wave at c = " + fmt(c) + ": " + out.reason);
  return std::move(*out.profile);
}

double profile_residual(const WaveProfile& p) {
  const std::size_t n = p.W.size();
  if (n < 8) throw PreconditionError("profile too short for a residual check");
  const double h = p.dx();
  double worst = 0.0;
  if (p.mode == WaveMode::Local) {
    auto d1 = [&](const std::vector<double>& v, std::size_t i) {
      return (-v[i - 3] + 9.0 * v[i - 2] - 45.0 * v[i - 1] + 45.0 * v[i + 1] - 9.0 * v[i + 2] + v[i + 3]) /
             (60.0 * h);
    };
    for (std::size_t i = 3; i + 3 < n; ++i) {
      const double r1 = std::abs(d1(p.dW, i) + p.c * p.dW[i] + p.family.f(p.W[i], p.s));
      const double r2 = std::abs(d1(p.W, i) - p.dW[i]);
      worst = std::max({worst, r1, r2});
    }
    return worst;
  }
  NonlocalDisc d;
  d.dx = h;
  d.w = simpson_weights(p.kernel, h);
  d.m = static_cast<int>(d.w.size() / 2);
  d.n = static_cast<int>(n);
  d.c = p.c;
  d.s = p.s;
  d.family = &p.family;
  return sup_norm(nonlocal_operator(d, p.W, p.c));
}

// ------------------------------------------------------------------- decay

DecayFit fit_tail(const WaveProfile& p) {
  const std::size_t n = p.W.size();
  std::size_t lo = 0;
  while (lo < n && p.W[lo] >= 1e-2) ++lo;
  std::size_t hi = lo;
  while (hi < n && p.W[hi] >= 1e-9) ++hi;
  const std::size_t count = hi - lo;
  if (count < 50)
    throw PreconditionError("tail window 1e-9 <= W < 1e-2 has " + std::to_string(count) +
                            " points; at least 50 are required");
  const double xs = p.xi[lo];
  const double xe = p.xi[hi - 1];

  // stage (i): mean log-derivative over the window
  const double lam_init = (std::log(p.W[lo]) - std::log(p.W[hi - 1])) / (xe - xs);

  // stage (ii): for fixed lambda the model (a u + b) e^{-lambda u} + k e^{-2 lambda u}, u = xi - xs,
  // is linear in (a, b, k); the k term absorbs the first nonlinear correction of the tail.
  struct Solve {
    double a, b, rss, cov_aa;
  };
  auto solve = [&](double lam) {
    Eigen::Matrix3d N = Eigen::Matrix3d::Zero();
    Eigen::Vector3d t = Eigen::Vector3d::Zero();
    for (std::size_t i = lo; i < hi; ++i) {
      const double u = p.xi[i] - xs;
      const double e = std::exp(-lam * u);
      const Eigen::Vector3d row(u * e / p.W[i], e / p.W[i], e * e / p.W[i]);
      N += row * row.transpose();
      t += row;
    }
    const Eigen::Matrix3d Ninv = N.inverse();
    const Eigen::Vector3d coef = Ninv * t;
    double rss = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double u = p.xi[i] - xs;
      const double e = std::exp(-lam * u);
      const double r = ((coef[0] * u + coef[1]) * e + coef[2] * e * e) / p.W[i] - 1.0;
      rss += r * r;
    }
    return Solve{coef[0], coef[1], rss, Ninv(0, 0)};
  };
  // the misfit is multimodal in lambda with narrow wells: dense scan, then refine
  // every local minimum of the scan and keep the best
  constexpr int kScan = 2001;
  const double l_lo = 0.5 * lam_init, l_hi = 1.5 * lam_init, step = (l_hi - l_lo) / (kScan - 1);
  std::vector<double> scan(kScan);
  for (int k = 0; k < kScan; ++k) scan[static_cast<std::size_t>(k)] = solve(l_lo + k * step).rss;
  numerics::Minimum best{l_lo, std::numeric_limits<double>::infinity()};
  for (int k = 0; k < kScan; ++k) {
    const auto K = static_cast<std::size_t>(k);
    if ((k > 0 && scan[K - 1] < scan[K]) || (k + 1 < kScan && scan[K + 1] < scan[K])) continue;
    const auto m = numerics::golden_section([&](double lam) { return solve(lam).rss; },
                                            l_lo + std::max(k - 1, 0) * step,
                                            l_lo + std::min(k + 1, kScan - 1) * step, 1e-12 * lam_init);
    if (m.fx < best.fx) best = m;
  }
  const Solve s = solve(best.x);
  const double scale = std::exp(best.x * xs);
  DecayFit fit;
  fit.lambda_hat = best.x;
  fit.A_hat = s.a * scale;
  fit.B_hat = (s.b - s.a * xs) * scale;
  const double sigma2 = s.rss / static_cast<double>(count - 4);
  fit.A_stderr = std::sqrt(sigma2 * s.cov_aa) * scale;
  fit.residual = std::sqrt(s.rss / static_cast<double>(count));
  fit.xi_lo = xs;
  fit.xi_hi = xe;
  fit.samples = static_cast<int>(count);
  return fit;
}

DecayResult fit_decay(const WaveProfile& p, const SpectralData& sd, double c) {
  DecayResult out;
  out.fit = fit_tail(p);
  const DecayFit& f = out.fit;
  FrontClass& fc = out.front;
  fc.lambda0 = sd.lambda0;
  std::tie(fc.lambda_minus, fc.lambda_plus) = lambda_roots(p.kernel, sd.gamma0, c);
  fc.a_ratio = std::abs(f.A_hat) * std::abs(f.xi_hi) / std::max(std::abs(f.B_hat), 1e-300);

  std::ostringstream ev;
  ev.precision(6);
  ev << "lambda_hat=" << f.lambda_hat << " lambda0=" << fc.lambda0 << " lambda-=" << fc.lambda_minus
     << " lambda+=" << fc.lambda_plus << " A=" << f.A_hat << " B=" << f.B_hat << " |A|xi_end/|B|=" << fc.a_ratio;
  fc.evidence = ev.str();

  if (std::abs(f.lambda_hat - sd.lambda0) <= 0.02 * sd.lambda0) {
    if (fc.a_ratio <= 0.05) {
      fc.kind = FrontKind::Transition;
      return out;
    }
    if (f.A_hat > 0.0) {
      fc.kind = FrontKind::Pulled;
      return out;
    }
    throw Unclassified("decay rate matches lambda0 but A < 0: " + fc.evidence);
  }
  if (c <= sd.c0_star * (1.0 + 1e-12))
    throw Unclassified("decay rate differs from lambda0 at the linear speed: " + fc.evidence);
  const double dp = std::abs(f.lambda_hat - fc.lambda_plus) / fc.lambda_plus;
  const double dm = std::abs(f.lambda_hat - fc.lambda_minus) / fc.lambda_minus;
  if (std::min(dp, dm) > 0.05) throw Unclassified("decay rate matches none of lambda0, lambda-, lambda+: " + fc.evidence);
  fc.kind = dp <= dm ? FrontKind::Pushed : FrontKind::Supercritical;
  return out;
}

DecayResult fit_decay(const WaveProfile& p, const SpectralData& sd) { return fit_decay(p, sd, p.c); }

LeftTailFit fit_left_tail(const WaveProfile& p) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < p.W.size(); ++i) {
    const double gap = 1.0 - p.W[i];
    if (gap >= 1e-8 * (1 - 1e-9) && gap <= 1e-3) {
      x.push_back(p.xi[i]);
      y.push_back(std::log(gap));
    }
    if (gap > 1e-3) break;
  }
  if (x.size() < 10) throw PreconditionError("left tail window 1e-8 <= 1 - W <= 1e-3 has too few points");
  const auto fit = numerics::linear_regression(x, y);
  return LeftTailFit{fit.slope, x.front(), x.back(), fit.residual_rms, static_cast<int>(x.size())};
}

}  // namespace frontlab
