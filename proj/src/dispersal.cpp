#include "frontlab/dispersal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "frontlab/errors.hpp"
#include "frontlab/numerics.hpp"

namespace frontlab {

namespace {

constexpr double kPi = std::numbers::pi;

void require_nonlocal(const KernelSpec& kernel, const char* op) {
  if (kernel.is_local())
    throw UnsupportedOperation(std::string(op) + ": Local kernel has no moment-generating function");
}

void require_width(double L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("kernel half-width L must be positive");
}

// sinh(x)/x with a series near zero.
double sinhc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 6.0;
  return std::sinh(x) / x;
}

double interpolate(const std::vector<std::pair<double, double>>& s, double x) {
  if (x < s.front().first || x > s.back().first) return 0.0;
  auto it = std::upper_bound(s.begin(), s.end(), x,
                             [](double v, const std::pair<double, double>& p) { return v < p.first; });
  if (it == s.end()) return s.back().second;
  if (it == s.begin()) return s.front().second;
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

}  // namespace

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Local:
      return "Local";
    case KernelKind::Box:
      return "Box";
    case KernelKind::Triangle:
      return "Triangle";
    case KernelKind::CosineBump:
      return "CosineBump";
    case KernelKind::Tabulated:
      return "Tabulated";
  }
  return "?";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  for (auto k : {KernelKind::Local, KernelKind::Box, KernelKind::Triangle, KernelKind::CosineBump,
                 KernelKind::Tabulated})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown kernel kind '" + name +
                    "' (expected Local, Box, Triangle, CosineBump or Tabulated)");
}

KernelSpec KernelSpec::local() { return KernelSpec(KernelKind::Local, 0.0); }

KernelSpec KernelSpec::box(double L) {
  require_width(L);
  return KernelSpec(KernelKind::Box, L);
}

KernelSpec KernelSpec::triangle(double L) {
  require_width(L);
  return KernelSpec(KernelKind::Triangle, L);
}

KernelSpec KernelSpec::cosine_bump(double L) {
  require_width(L);
  return KernelSpec(KernelKind::CosineBump, L);
}

KernelSpec KernelSpec::tabulated(std::vector<std::pair<double, double>> samples) {
  if (samples.size() < 3) throw ConfigError("tabulated kernel needs at least 3 samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& [x, j] = samples[i];
    if (!std::isfinite(x) || !std::isfinite(j)) throw ConfigError("tabulated kernel: non-finite sample");
    if (j < 0.0) throw ConfigError("tabulated kernel: negative density");
    if (i > 0 && !(x > samples[i - 1].first))
      throw ConfigError("tabulated kernel: abscissae must be strictly increasing");
  }
  const double L = std::max(std::abs(samples.front().first), std::abs(samples.back().first));
  require_width(L);
  for (const auto& [x, j] : samples)
    if (std::abs(j - interpolate(samples, -x)) > 1e-12)
      throw ConfigError("tabulated kernel is not symmetric: J(x) != J(-x)");

  double mass = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    mass += 0.5 * (samples[i].second + samples[i - 1].second) * (samples[i].first - samples[i - 1].first);
  if (std::abs(mass - 1.0) > 0.01) {
    std::ostringstream os;
    os << "tabulated kernel mass " << mass << " differs from 1 by more than 1%";
    throw ConfigError(os.str());
  }
  for (auto& s : samples) s.second /= mass;

  KernelSpec k(KernelKind::Tabulated, L);
  k.samples_ = std::move(samples);
  return k;
}

KernelSpec KernelSpec::load_tabulated(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open kernel sample file " + path.string());
  std::vector<std::pair<double, double>> samples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double x, j;
    if (!(ls >> x)) continue;
    if (!(ls >> j)) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
    }
    samples.emplace_back(x, j);
  }
  return tabulated(std::move(samples));
}

double KernelSpec::density(double x) const {
  const double ax = std::abs(x);
  switch (kind_) {
    case KernelKind::Local:
      throw UnsupportedOperation("density: Local kernel has no density");
    case KernelKind::Box:
      return ax <= L_ ? 0.5 / L_ : 0.0;
    case KernelKind::Triangle:
      return ax <= L_ ? (L_ - ax) / (L_ * L_) : 0.0;
    case KernelKind::CosineBump:
      return ax <= L_ ? (1.0 + std::cos(kPi * x / L_)) / (2.0 * L_) : 0.0;
    case KernelKind::Tabulated:
      return interpolate(samples_, x);
  }
  return 0.0;
}

std::vector<double> KernelSpec::breakpoints() const {
  if (kind_ == KernelKind::Local) return {};
  if (kind_ == KernelKind::Tabulated) {
    std::vector<double> b;
    b.reserve(samples_.size());
    for (const auto& s : samples_) b.push_back(s.first);
    return b;
  }
  return {-L_, 0.0, L_};
}

double mgf_moment(const KernelSpec& kernel, double lam, int order) {
  require_nonlocal(kernel, "mgf");
  if (!std::isfinite(lam)) throw DomainError("mgf: lambda must be finite");
  if (order < 0 || order > 2) throw DomainError("mgf_moment: order must be 0, 1 or 2");
  const auto bp = kernel.breakpoints();
  const int panels = kernel.kind() == KernelKind::Tabulated ? 1 : 32;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    sum += numerics::gauss_legendre(
        [&](double y) { return std::pow(y, order) * kernel.density(y) * std::exp(lam * y); }, bp[i],
        bp[i + 1], panels);
  }
  return sum;
}

double mgf(const KernelSpec& kernel, double lam) {
  require_nonlocal(kernel, "mgf");
  if (!std::isfinite(lam)) throw DomainError("mgf: lambda must be finite");
  const double x = lam * kernel.L();
  switch (kernel.kind()) {
    case KernelKind::Box:
      return sinhc(x);
    case KernelKind::Triangle: {
      const double s = sinhc(0.5 * x);
      return s * s;  // 2(cosh x - 1)/x^2
    }
    case KernelKind::CosineBump:
      return sinhc(x) * kPi * kPi / (x * x + kPi * kPi);
    default:
      return mgf_moment(kernel, lam, 0);
  }
}

double h_value(const KernelSpec& kernel, double gamma0, double lam) {
  if (kernel.is_local()) return lam * lam + gamma0;
  return mgf(kernel, lam) - 1.0 + gamma0;
}

double lambda_max(const KernelSpec& kernel) {
  require_nonlocal(kernel, "lambda_max");
  return 50.0 / kernel.L();
}

SpectralData linear_speed(const KernelSpec& kernel, double gamma0) {
  if (!(gamma0 > 0.0)) throw DomainError("linear_speed: gamma0 must be positive");
  SpectralData out;
  out.gamma0 = gamma0;
  if (kernel.is_local()) {
    out.local = true;
    out.lambda0 = std::sqrt(gamma0);
    out.c0_star = 2.0 * out.lambda0;
    return out;
  }
  out.local = false;
  const double lmax = lambda_max(kernel);
  auto ratio = [&](double lam) { return (mgf(kernel, lam) - 1.0 + gamma0) / lam; };

  // bracket on a geometric scan of (0, lmax]
  constexpr int kScan = 400;
  const double lmin = lmax * 1e-8;
  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> grid(kScan);
  for (int i = 0; i < kScan; ++i) {
    grid[static_cast<std::size_t>(i)] = lmin * std::pow(lmax / lmin, static_cast<double>(i) / (kScan - 1));
    const double v = ratio(grid[static_cast<std::size_t>(i)]);
    if (v < best_val) {
      best_val = v;
      best = static_cast<std::size_t>(i);
    }
  }
  if (best == 0 || best + 1 == grid.size())
    throw ConfigError("linear_speed: minimizer bracket not found below lambda_max = 50/L");

  const double a = grid[best - 1], b = grid[best + 1];
  out.minimizer_tol = 1e-7 * grid[best];
  auto gmin = numerics::golden_section(ratio, a, b, out.minimizer_tol);

  // Newton polish on the stationarity condition lambda M'(lambda) - M(lambda) + 1 - gamma0 = 0
  double lam = gmin.x;
  for (int it = 0; it < 50; ++it) {
    const double m0 = mgf(kernel, lam), m1 = mgf_moment(kernel, lam, 1), m2 = mgf_moment(kernel, lam, 2);
    const double phi = lam * m1 - m0 + 1.0 - gamma0;
    const double dphi = lam * m2;
    const double step = phi / dphi;
    double next = lam - step;
    if (!(next > a && next < b)) next = 0.5 * (lam + (step > 0 ? a : b));
    out.newton_iterations = it + 1;
    const bool done = std::abs(next - lam) <= 1e-15 * lam;
    lam = next;
    if (done) break;
  }
  out.lambda0 = lam;
  out.c0_star = ratio(lam);
  out.stationarity_residual = std::abs(mgf_moment(kernel, lam, 1) - out.c0_star);
  if (out.stationarity_residual > 1e-8)
    throw NonconvergenceError("linear_speed: first-moment identity c0* = M'(lambda0) fails by " +
                              std::to_string(out.stationarity_residual));
  return out;
}

std::pair<double, double> lambda_roots(const KernelSpec& kernel, double gamma0, double c) {
  const SpectralData sd = linear_speed(kernel, gamma0);
  if (c < sd.c0_star - 1e-12) {
    std::ostringstream os;
    os << "lambda_roots: speed c = " << c << " below linear speed c0* = " << sd.c0_star;
    throw NoRealRoot(os.str());
  }
  if (std::abs(c - sd.c0_star) <= 1e-9) return {sd.lambda0, sd.lambda0};
  if (kernel.is_local()) {
    const double disc = std::sqrt(std::max(0.0, c * c - 4.0 * gamma0));
    // product of roots is gamma0; avoid cancellation in the small root
    const double plus = 0.5 * (c + disc);
    return {gamma0 / plus, plus};
  }
  auto phi = [&](double lam) { return h_value(kernel, gamma0, lam) - c * lam; };
  const double lmax = lambda_max(kernel);
  if (phi(lmax) <= 0.0) throw ConfigError("lambda_roots: upper root lies beyond lambda_max = 50/L");
  const double lo = numerics::bisect(phi, 0.0, sd.lambda0);
  const double hi = numerics::bisect(phi, sd.lambda0, lmax);
  return {lo, hi};
}

double mu_root(const KernelSpec& kernel, double f1, double c) {
  if (!(f1 < 0.0)) throw DomainError("mu_root: f'(1) must be negative");
  if (!(c > 0.0)) throw DomainError("mu_root: speed must be positive");
  if (kernel.is_local()) {
    // positive root of mu^2 + c mu + f1, written without cancellation
    return -2.0 * f1 / (c + std::sqrt(c * c - 4.0 * f1));
  }
  auto psi = [&](double mu) { return mgf(kernel, mu) - 1.0 + c * mu + f1; };
  const double lmax = lambda_max(kernel);
  double hi = 1.0 / kernel.L();
  while (psi(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > lmax) throw ConfigError("mu_root: root lies beyond lambda_max = 50/L");
  }
  return numerics::bisect(psi, 0.0, hi);
}

}  // namespace frontlab
