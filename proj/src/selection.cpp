#include "frontlab/selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "frontlab/errors.hpp"

namespace frontlab {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Rethrow with context, keeping the category that decides the CLI exit code.
[[noreturn]] void annotate(const Error& e, const std::string& context) {
  const std::string msg = context + ": " + e.what();
  if (dynamic_cast<const NonconvergenceError*>(&e)) throw NonconvergenceError(msg);
  if (dynamic_cast<const AssumptionViolation*>(&e)) throw AssumptionViolation(msg);
  if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(msg);
  if (dynamic_cast<const PreconditionError*>(&e)) throw PreconditionError(msg);
  throw Error(msg);
}

double default_tol(const KernelSpec& kernel, double tol) {
  if (!(tol > 0.0)) return kernel.is_local() ? 1e-8 : 1e-9;
  return kernel.is_local() ? std::max(tol, 1e-8) : tol;
}

}  // namespace

std::string class_label(const CurvePoint& p) { return p.kind ? to_string(*p.kind) : "Unclassified"; }

CurvePoint evaluate_point(const FamilySpec& family, const KernelSpec& kernel, const SpectralData& sd, double s,
                          double speed_tol) {
  CurvePoint pt;
  pt.s = s;
  try {
    const MinimalWave mw = minimal_wave(family, s, kernel, default_tol(kernel, speed_tol));
    pt.c_star = mw.c;
    try {
      const DecayResult d = fit_decay(mw.profile, sd);
      pt.kind = d.front.kind;
      pt.fit = d.fit;
      pt.evidence = d.front.evidence;
    } catch (const Unclassified& e) {
      pt.fit = fit_tail(mw.profile);
      pt.evidence = e.what();
    }
  } catch (const Error& e) {
    annotate(e, "s = " + fmt(s));
  }
  return pt;
}

std::vector<CurvePoint> speed_curve(const FamilySpec& family, const KernelSpec& kernel,
                                    const std::vector<double>& s_list, const SelectionOptions& opts) {
  if (!std::is_sorted(s_list.begin(), s_list.end()))
    throw PreconditionError("speed_curve: parameter list must be sorted ascending");
  std::vector<CurvePoint> rows(s_list.size());
  if (s_list.empty()) return rows;
  const SpectralData sd = linear_speed(kernel, family.gamma0());
  const int nthreads = std::clamp(opts.threads, 1, static_cast<int>(s_list.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(s_list.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < s_list.size(); i = next++) {
      try {
        rows[i] = evaluate_point(family, kernel, sd, s_list[i], opts.speed_tol);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  // report the first failing row in list order
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

ThresholdResult find_threshold(const FamilySpec& family, const KernelSpec& kernel, double s_lo, double s_hi,
                               double tol_s, double eps_c, const SelectionOptions& opts) {
  if (!(s_lo < s_hi)) throw PreconditionError("find_threshold: need s_lo < s_hi");
  if (!(tol_s > 0.0) || !(eps_c > 0.0)) throw PreconditionError("find_threshold: tol_s and eps_c must be positive");
  const SpectralData sd = linear_speed(kernel, family.gamma0());
  ThresholdResult r;
  r.range_lo = s_lo;
  r.range_hi = s_hi;
  r.tol_s = tol_s;
  r.eps_c = eps_c;
  r.c_lin = sd.c0_star;
  r.kernel = kernel;
  r.family = family;
  r.speed_tol = opts.speed_tol;
  const std::string hyp = kernel.is_local() ? "(A4)/(A5)" : "(A6)/(A7)";

  auto sample = [&](double s) {
    r.curve.push_back(evaluate_point(family, kernel, sd, s, opts.speed_tol));
    return r.curve.back().c_star > sd.c0_star + eps_c;
  };
  if (sample(s_lo))
    throw AssumptionViolation("threshold predicate c*(s) > c_lin + eps_c already holds at s_lo = " + fmt(s_lo) +
                              " (c* = " + fmt(r.curve.back().c_star) + "); the bracket violates " + hyp);
  if (!sample(s_hi))
    throw AssumptionViolation("threshold predicate c*(s) > c_lin + eps_c fails at s_hi = " + fmt(s_hi) +
                              " (c* = " + fmt(r.curve.back().c_star) + "); the bracket violates " + hyp);
  double lo = s_lo, hi = s_hi;
  while (hi - lo > tol_s) {
    const double mid = 0.5 * (lo + hi);
    (sample(mid) ? hi : lo) = mid;
  }
  r.s_lo = lo;
  r.s_hi = hi;
  r.s_star = 0.5 * (lo + hi);
  r.transition = evaluate_point(family, kernel, sd, r.s_star, opts.speed_tol);
  std::sort(r.curve.begin(), r.curve.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.s < b.s; });
  return r;
}

CertificateReport transition_certificate(const ThresholdResult& result) {
  CertificateReport rep;
  if (!result.transition) {
    rep.notes.push_back("result carries no transition fit");
    return rep;
  }
  const SpectralData sd = linear_speed(result.kernel, result.family.gamma0());
  auto probe = [&](const std::string& role, double s, FrontKind expected) {
    CertificateProbe p;
    p.role = role;
    p.s = s;
    p.expected = to_string(expected);
    if (role == "at") {
      p.point = *result.transition;
    } else {
      try {
        p.point = evaluate_point(result.family, result.kernel, sd, s, result.speed_tol);
      } catch (const Error& e) {
        p.point.s = s;
        p.point.evidence = e.what();
      }
    }
    p.ok = p.point.kind && *p.point.kind == expected;
    rep.probes.push_back(p);
  };
  const double d = 5.0 * result.tol_s;
  double below = result.s_star - d, above = result.s_star + d;
  if (below < result.range_lo) {
    rep.notes.push_back("lower probe " + fmt(below) + " clamped to " + fmt(result.range_lo));
    below = result.range_lo;
  }
  if (above > result.range_hi) {
    rep.notes.push_back("upper probe " + fmt(above) + " clamped to " + fmt(result.range_hi));
    above = result.range_hi;
  }
  probe("below", below, FrontKind::Pulled);
  probe("at", result.s_star, FrontKind::Transition);
  probe("above", above, FrontKind::Pushed);
  rep.pass = std::all_of(rep.probes.begin(), rep.probes.end(), [](const CertificateProbe& p) { return p.ok; });
  return rep;
}

}  // namespace frontlab
