#include "frontlab/families.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "frontlab/errors.hpp"

namespace frontlab {

namespace {

constexpr double kIdentityTol = 1e-14;
constexpr double kKppTol = -1e-12;
constexpr std::size_t kMaxViolationsPerCheck = 64;

double coeff_at(const std::array<double, 2>& a, double s) { return a[0] + a[1] * s; }

void add_violation(AssumptionReport& report, AssumptionCheck check, double w, double s,
                   std::string detail) {
  const auto n = std::count_if(report.violation_points.begin(), report.violation_points.end(),
                               [check](const Violation& v) { return v.check == check; });
  if (static_cast<std::size_t>(n) < kMaxViolationsPerCheck)
    report.violation_points.push_back({check, w, s, std::move(detail)});
}

std::vector<double> s_samples(Interval range, int n_s) {
  if (range.hi <= range.lo) return {range.lo};
  std::vector<double> out(static_cast<std::size_t>(n_s));
  for (int k = 0; k < n_s; ++k)
    out[static_cast<std::size_t>(k)] = range.lo + (range.hi - range.lo) * k / (n_s - 1);
  return out;
}

}  // namespace

std::string to_string(FamilyKind kind) {
  return kind == FamilyKind::HadelerRothe ? "HadelerRothe" : "PolyAffine";
}

FamilyKind family_kind_from_string(const std::string& name) {
  if (name == "HadelerRothe") return FamilyKind::HadelerRothe;
  if (name == "PolyAffine") return FamilyKind::PolyAffine;
  throw ConfigError("unknown family kind '" + name + "' (expected HadelerRothe or PolyAffine)");
}

FamilySpec::FamilySpec(FamilyKind kind, Coefficients coefficients, double gamma0, Interval s_range)
    : kind_(kind), coefficients_(std::move(coefficients)), gamma0_(gamma0), s_range_(s_range) {}

FamilySpec FamilySpec::hadeler_rothe(Interval s_range) {
  // w(1-w)(1+sw) = w + (s-1) w^2 - s w^3
  return FamilySpec(FamilyKind::HadelerRothe, {{0.0, 0.0}, {1.0, 0.0}, {-1.0, 1.0}, {0.0, -1.0}},
                    1.0, s_range);
}

FamilySpec FamilySpec::poly_affine(Coefficients coefficients, double gamma0, Interval s_range) {
  if (coefficients.size() < 3)
    throw ConfigError("PolyAffine family needs degree >= 2 (at least 3 coefficient rows)");
  for (const auto& row : coefficients)
    if (!std::isfinite(row[0]) || !std::isfinite(row[1]))
      throw ConfigError("PolyAffine coefficients must be finite");
  if (!(gamma0 > 0.0)) throw ConfigError("gamma0 must be positive");
  if (s_range.hi < s_range.lo || s_range.lo < 0.0)
    throw ConfigError("s-range must satisfy 0 <= lo <= hi");

  double sum0 = 0.0, sum1 = 0.0, scale = 0.0;
  for (const auto& row : coefficients) {
    sum0 += row[0];
    sum1 += row[1];
    scale = std::max({scale, std::abs(row[0]), std::abs(row[1])});
  }
  const double tol = kIdentityTol * std::max(1.0, scale);
  if (std::abs(coefficients[0][0]) > tol || std::abs(coefficients[0][1]) > tol)
    throw ConfigError("PolyAffine family violates f(0;s) = 0 (constant row must vanish)");
  if (std::abs(sum0) > tol || std::abs(sum1) > tol)
    throw ConfigError("PolyAffine family violates f(1;s) = 0 (coefficient columns must sum to 0)");
  if (std::abs(coefficients[1][1]) > tol)
    throw ConfigError("PolyAffine family has s-dependent f'(0;s); gamma0 must be s-independent");
  if (std::abs(coefficients[1][0] - gamma0) > tol * std::max(1.0, gamma0)) {
    std::ostringstream os;
    os << "declared gamma0 = " << gamma0 << " disagrees with f'(0) = " << coefficients[1][0];
    throw ConfigError(os.str());
  }
  return FamilySpec(FamilyKind::PolyAffine, std::move(coefficients), gamma0, s_range);
}

double FamilySpec::f(double w, double s) const noexcept {
  double acc = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it)
    acc = acc * w + coeff_at(*it, s);
  return acc;
}

double FamilySpec::df(double w, double s) const noexcept {
  double acc = 0.0;
  for (std::size_t j = coefficients_.size() - 1; j >= 1; --j)
    acc = acc * w + static_cast<double>(j) * coeff_at(coefficients_[j], s);
  return acc;
}

double FamilySpec::d2f(double w, double s) const noexcept {
  double acc = 0.0;
  for (std::size_t j = coefficients_.size() - 1; j >= 2; --j)
    acc = acc * w + static_cast<double>(j * (j - 1)) * coeff_at(coefficients_[j], s);
  return acc;
}

double FamilySpec::ds(double w) const noexcept {
  double acc = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * w + (*it)[1];
  return acc;
}

double FamilySpec::difference(double a, double b, double s) const noexcept {
  return (a - b) * divided_difference(a, b, s);
}

double FamilySpec::divided_difference(double a, double b, double s) const noexcept {
  // sum_j c_j (a^j - b^j) = (a - b) sum_j c_j D_j,  D_1 = 1, D_{j+1} = a D_j + b^j
  double quotient = 0.0;
  double d = 1.0;
  double b_pow = 1.0;
  for (std::size_t j = 1; j < coefficients_.size(); ++j) {
    quotient += coeff_at(coefficients_[j], s) * d;
    b_pow *= b;
    d = a * d + b_pow;
  }
  return quotient;
}

double FamilySpec::max_abs_df(double s, int n) const {
  double m = 0.0;
  for (int i = 0; i < n; ++i) m = std::max(m, std::abs(df(static_cast<double>(i) / (n - 1), s)));
  return m;
}

double f_eval(const FamilySpec& spec, double w, double s, int order) {
  if (!(w >= 0.0 && w <= 1.0)) {
    std::ostringstream os;
    os << "f_eval: state w = " << w << " outside [0,1]";
    throw DomainError(os.str());
  }
  if (!(s >= 0.0)) throw DomainError("f_eval: parameter s must be >= 0");
  switch (order) {
    case 0:
      return spec.f(w, s);
    case 1:
      return spec.df(w, s);
    case 2:
      return spec.d2f(w, s);
    default:
      throw DomainError("f_eval: derivative order must be 0, 1 or 2");
  }
}

bool kpp_holds(const FamilySpec& spec, double s, int n_grid) {
  if (n_grid < 100) throw PreconditionError("kpp_holds: n_grid must be >= 100");
  const double g0 = spec.gamma0();
  auto ok = [&](double w) { return g0 * w - spec.f(w, s) >= kKppTol; };
  for (int i = 0; i < n_grid; ++i)
    if (!ok(static_cast<double>(i) / (n_grid - 1))) return false;
  // log-spaced points in (1e-6, 1/n_grid)
  const int n_log = std::max(10, n_grid / 10);
  const double lo = std::log(1e-6), hi = std::log(1.0 / n_grid);
  for (int i = 0; i < n_log; ++i)
    if (!ok(std::exp(lo + (hi - lo) * i / (n_log - 1)))) return false;
  return true;
}

std::string to_string(AssumptionCheck check) {
  switch (check) {
    case AssumptionCheck::A1:
      return "A1";
    case AssumptionCheck::A2:
      return "A2";
    case AssumptionCheck::A3:
      return "A3";
    case AssumptionCheck::KPP:
      return "KPP";
  }
  return "?";
}

AssumptionReport verify_assumptions(const FamilySpec& spec, Interval s_range,
                                    AssumptionGrids grids) {
  if (!(s_range.hi >= s_range.lo)) throw PreconditionError("verify_assumptions: empty s-range");
  if (grids.n_w < 100 || grids.n_s < 2)
    throw PreconditionError("verify_assumptions: need n_w >= 100 and n_s >= 2");

  AssumptionReport report;
  const int n_w = grids.n_w;
  const auto svals = s_samples(s_range, grids.n_s);
  auto wgrid = [n_w](int i) { return static_cast<double>(i) / (n_w - 1); };

  // (A1) monostable sign/zero structure
  for (double s : svals) {
    const double f0 = spec.f(0.0, s), f1 = spec.f(1.0, s);
    if (std::abs(f0) > kIdentityTol || std::abs(f1) > kIdentityTol) {
      report.a1_pass = false;
      add_violation(report, AssumptionCheck::A1, std::abs(f0) > kIdentityTol ? 0.0 : 1.0, s,
                    "f does not vanish at an endpoint");
    }
    const double d0 = spec.df(0.0, s);
    if (!(d0 > 0.0) || std::abs(d0 - spec.gamma0()) > 1e-12) {
      report.a1_pass = false;
      add_violation(report, AssumptionCheck::A1, 0.0, s, "f'(0;s) differs from gamma0 > 0");
    }
    if (!(spec.df(1.0, s) < 0.0)) {
      report.a1_pass = false;
      add_violation(report, AssumptionCheck::A1, 1.0, s, "f'(1;s) is not negative");
    }
    for (int i = 1; i < n_w - 1; ++i) {
      const double w = wgrid(i);
      if (!(spec.f(w, s) > 0.0)) {
        report.a1_pass = false;
        add_violation(report, AssumptionCheck::A1, w, s, "f(w;s) <= 0 inside (0,1)");
      }
    }
  }

  // (A2) Lipschitz estimate in s for f, f', f''
  auto lipschitz_pair = [&](double sa, double sb) {
    double l = 0.0;
    for (int i = 0; i < n_w; ++i) {
      const double w = wgrid(i);
      l = std::max({l, std::abs(spec.f(w, sb) - spec.f(w, sa)), std::abs(spec.df(w, sb) - spec.df(w, sa)),
                    std::abs(spec.d2f(w, sb) - spec.d2f(w, sa))});
    }
    return l / (sb - sa);
  };
  if (svals.size() == 1) {
    constexpr double h = 1e-6;
    report.a2_lipschitz_estimate = lipschitz_pair(svals[0], svals[0] + h);
  } else {
    for (std::size_t k = 0; k + 1 < svals.size(); ++k)
      report.a2_lipschitz_estimate =
          std::max(report.a2_lipschitz_estimate, lipschitz_pair(svals[k], svals[k + 1]));
  }
  if (!std::isfinite(report.a2_lipschitz_estimate)) {
    report.a2_pass = false;
    add_violation(report, AssumptionCheck::A2, 0.0, s_range.lo, "Lipschitz estimate not finite");
  }

  // (A3) strict monotonicity in s
  for (std::size_t k = 0; k + 1 < svals.size(); ++k) {
    const double sa = svals[k], sb = svals[k + 1];
    for (int i = 1; i < n_w - 1; ++i) {
      const double w = wgrid(i);
      if (!(spec.f(w, sb) > spec.f(w, sa))) {
        report.a3_pass = false;
        add_violation(report, AssumptionCheck::A3, w, sb, "f(w;s) not increasing in s");
      }
    }
    if (!(spec.d2f(0.0, sb) > spec.d2f(0.0, sa))) {
      report.a3_pass = false;
      add_violation(report, AssumptionCheck::A3, 0.0, sb, "f''(0;s) not increasing in s");
    }
  }

  if (!kpp_holds(spec, s_range.lo, n_w)) {
    report.kpp_pass = false;
    add_violation(report, AssumptionCheck::KPP, 0.0, s_range.lo,
                  "KPP condition fails at the lower end of the s-range");
  }
  return report;
}

}  // namespace frontlab
