#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

namespace frontlab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

enum class FamilyKind { HadelerRothe, PolyAffine };

std::string to_string(FamilyKind kind);
FamilyKind family_kind_from_string(const std::string& name);

// One-parameter monostable family f(w;s) = sum_j (a[j][0] + a[j][1] s) w^j.
//
// Both supported kinds are affine in s, so the s-derivative is exact and
// f(w;s+d) - f(w;s) = d * df/ds(w). Hadeler-Rothe w(1-w)(1+sw) is stored with
// its expanded coefficient table.
class FamilySpec {
 public:
  using Coefficients = std::vector<std::array<double, 2>>;

  static FamilySpec hadeler_rothe(Interval s_range = {0.0, std::numeric_limits<double>::infinity()});

  // Throws ConfigError unless f(0;s) = f(1;s) = 0 and f'(0;s) = gamma0 hold
  // at the coefficient level.
  static FamilySpec poly_affine(Coefficients coefficients, double gamma0,
                                Interval s_range = {0.0, std::numeric_limits<double>::infinity()});

  FamilyKind kind() const noexcept { return kind_; }
  const Coefficients& coefficients() const noexcept { return coefficients_; }
  double gamma0() const noexcept { return gamma0_; }
  const Interval& s_range() const noexcept { return s_range_; }
  int degree() const noexcept { return static_cast<int>(coefficients_.size()) - 1; }

  // Unchecked evaluation; w may leave [0,1] slightly (time stepping, fits).
  double f(double w, double s) const noexcept;
  double df(double w, double s) const noexcept;
  double d2f(double w, double s) const noexcept;
  // d/ds f(w;s), independent of s.
  double ds(double w) const noexcept;
  // f(a;s) - f(b;s) evaluated as (a-b) times the divided difference, so the
  // result keeps full relative accuracy when a and b nearly coincide.
  double difference(double a, double b, double s) const noexcept;
  // (f(a;s) - f(b;s)) / (a - b), finite at a = b (gives f'(b;s)).
  double divided_difference(double a, double b, double s) const noexcept;
  // max over w in [0,1] of |f'(w;s)|, sampled on n points.
  double max_abs_df(double s, int n = 2001) const;

 private:
  FamilySpec(FamilyKind kind, Coefficients coefficients, double gamma0, Interval s_range);

  FamilyKind kind_;
  Coefficients coefficients_;
  double gamma0_;
  Interval s_range_;
};

// Checked evaluation of f, f' or f'' at (w;s).
double f_eval(const FamilySpec& spec, double w, double s, int order);

// gamma0*w >= f(w;s) on a uniform grid of n_grid points plus a log-spaced
// cluster near w = 0, where weak-Allee violations first appear.
bool kpp_holds(const FamilySpec& spec, double s, int n_grid = 1000);

enum class AssumptionCheck { A1, A2, A3, KPP };
std::string to_string(AssumptionCheck check);

struct Violation {
  AssumptionCheck check;
  double w;
  double s;
  std::string detail;
};

struct AssumptionReport {
  bool a1_pass = true;
  bool a2_pass = true;
  double a2_lipschitz_estimate = 0.0;  // L0
  bool a3_pass = true;
  bool kpp_pass = true;  // KPP at the lower end of the s-range
  std::vector<Violation> violation_points;

  bool all_pass() const noexcept { return a1_pass && a2_pass && a3_pass && kpp_pass; }
};

struct AssumptionGrids {
  int n_w = 1000;
  int n_s = 50;
};

AssumptionReport verify_assumptions(const FamilySpec& spec, Interval s_range,
                                    AssumptionGrids grids = {});

}  // namespace frontlab
