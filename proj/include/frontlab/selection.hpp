#pragma once

#include <optional>
#include <string>
#include <vector>

#include "frontlab/dispersal.hpp"
#include "frontlab/families.hpp"
#include "frontlab/waves.hpp"

namespace frontlab {

struct CurvePoint {
  double s = 0.0;
  double c_star = 0.0;
  std::optional<FrontKind> kind;  // empty when the tail matches no candidate rate
  DecayFit fit;
  std::string evidence;
};

std::string class_label(const CurvePoint& p);

struct SelectionOptions {
  double speed_tol = 0.0;  // minimal-speed bisection width; 0 picks 1e-8 local, 1e-9 nonlocal
  int threads = 1;
};

// Minimal speed and decay class per parameter. s_list must be sorted ascending.
std::vector<CurvePoint> speed_curve(const FamilySpec& family, const KernelSpec& kernel,
                                    const std::vector<double>& s_list, const SelectionOptions& opts = {});

CurvePoint evaluate_point(const FamilySpec& family, const KernelSpec& kernel, const SpectralData& sd, double s,
                          double speed_tol);

struct ThresholdResult {
  double s_star = 0.0;
  double s_lo = 0.0;  // final bracket
  double s_hi = 0.0;
  double range_lo = 0.0;  // bracket supplied by the caller
  double range_hi = 0.0;
  double tol_s = 0.0;
  double eps_c = 0.0;
  double c_lin = 0.0;
  std::optional<CurvePoint> transition;  // minimal wave classified at s_star
  std::vector<CurvePoint> curve;         // every bisection sample, sorted by s
  KernelSpec kernel = KernelSpec::local();
  FamilySpec family = FamilySpec::hadeler_rothe();
  double speed_tol = 0.0;
};

// Bisection on c*(s) > c_lin + eps_c. Throws AssumptionViolation when the
// predicate is not false at s_lo and true at s_hi.
ThresholdResult find_threshold(const FamilySpec& family, const KernelSpec& kernel, double s_lo, double s_hi,
                               double tol_s = 0.02, double eps_c = 1e-6, const SelectionOptions& opts = {});

struct CertificateProbe {
  std::string role;  // below, at, above
  double s = 0.0;
  CurvePoint point;
  std::string expected;
  bool ok = false;
};

struct CertificateReport {
  bool pass = false;
  std::vector<CertificateProbe> probes;
  std::vector<std::string> notes;
};

// Transition at s_star, Pulled at s_star - 5 tol_s, Pushed at s_star + 5 tol_s.
CertificateReport transition_certificate(const ThresholdResult& result);

}  // namespace frontlab
