#include "frontlab/supersol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

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

bool nonlocal(const SupersolParams& p) { return p.mode == WaveMode::Nonlocal; }

double sigma_at(const SupersolParams& p, double x, int order) {
  const double u = x - p.xi1;
  if (!nonlocal(p)) {
    const double e = std::exp(-0.5 * u);
    switch (order) {
      case 0: return 4.0 * e - 4.0 + 4.0 * u;
      case 1: return 4.0 - 2.0 * e;
      default: return e;
    }
  }
  const double l = p.lambda0;
  const double e = std::exp(-0.5 * l * u);
  switch (order) {
    case 0: return e / (l * l) - 1.0 / (l * l) + u / l;
    case 1: return 1.0 / l - e / (2.0 * l);
    default: return e / 4.0;
  }
}

// R'(+) - R'(-) at xi1 + delta1 in units of eps1 e^{-lambda0 x}
double corner1_margin(const SupersolParams& p, double delta1) {
  const double x = p.xi1 + delta1;
  return sigma_at(p, x, 1) - (p.lambda0 + p.lambda1) * sigma_at(p, x, 0);
}

bool delta1_condition(const SupersolParams& p, double d) {
  if (!nonlocal(p)) return 1.0 + 3.0 * (1.0 - std::exp(-0.5 * d)) - 2.0 * d > 0.0;
  return 1.5 * std::exp(-0.5 * p.lambda0 * d) + d * p.lambda0 < 2.0;
}

// min over [xi2, xi2 + delta2] of the Step-3 margin, divided by eps3
double step3_margin(const SupersolParams& p, double delta4) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 200; ++k) {
    const double t = delta4 * p.delta2 * k / 200.0;
    const double v = nonlocal(p)
                         ? 0.5 * p.c * delta4 * std::cos(t) - (p.K2 + 0.5 * p.L * p.L * std::pow(delta4, 4)) * std::sin(t)
                         : delta4 * std::cos(t) - (p.K2 + delta4 * delta4) * std::sin(t);
    m = std::min(m, v);
  }
  return m;
}

// lambda1 R - R'(-) at xi2 + delta2, divided by eps3
double corner2_margin(const SupersolParams& p, double delta4) {
  return p.lambda1 * std::sin(delta4 * p.delta2) - delta4 * std::cos(delta4 * p.delta2);
}

void fill_eps(SupersolParams& p) {
  p.eps2 = p.eps1 * sigma_at(p, p.xi1 + p.delta1, 0) * std::exp(-(p.lambda0 + p.lambda1) * (p.xi1 + p.delta1));
  p.eps3 = p.eps2 * std::exp(p.lambda1 * (p.xi2 + p.delta2)) / std::sin(p.delta4 * p.delta2);
  p.eps4 = p.eps3 * std::sin(p.delta4 * p.delta3) / std::exp(p.lambda2 * (p.xi2 - p.delta3));
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

}  // namespace

SupersolConstants estimate_constants(const WaveProfile& profile, const FamilySpec& family, double s) {
  if (profile.W.empty()) throw PreconditionError("estimate_constants: empty profile");
  SupersolConstants k;
  double m1 = 0.0, m2 = 0.0;
  auto visit = [&](double w) {
    m1 = std::max(m1, std::abs(family.df(w, s)));
    m2 = std::max(m2, std::abs(family.d2f(w, s)));
  };
  for (double w : profile.W) visit(w);
  visit(0.0);
  visit(1.0);
  k.K1 = 1.05 * m2;
  k.K2 = 1.05 * m1;
  for (int i = 0; i <= 2000; ++i) k.L0 = std::max(k.L0, std::abs(family.ds(i / 2000.0)));
  const double f1 = family.df(1.0, s);
  if (!(f1 < 0.0)) throw AssumptionViolation("family/profile inconsistency: f'(1;s) = " + fmt(f1) + " is not negative");
  k.K3 = 0.5 * std::abs(f1);

  std::size_t i1 = 0;
  while (i1 < profile.W.size() && profile.W[i1] >= 1e-2) ++i1;
  if (i1 == profile.W.size())
    throw AssumptionViolation("family/profile inconsistency: the profile never drops below 1e-2");
  k.xi1 = profile.xi[i1];
  std::optional<std::size_t> i2;
  for (std::size_t i = 0; i < profile.W.size(); ++i)
    if (family.df(profile.W[i], s) < -k.K3) i2 = i;
  if (!i2)
    throw AssumptionViolation("family/profile inconsistency: f'(W*) never falls below -K3 = " + fmt(-k.K3));
  k.xi2 = profile.xi[*i2];
  if (!(k.xi2 < k.xi1)) throw AssumptionViolation("family/profile inconsistency: xi2 >= xi1");
  return k;
}

double nonlocal_k4(const KernelSpec& kernel, double lambda0) {
  auto g = [&](double y) {
    const double a = 0.5 * lambda0 * y;
    return kernel.density(y) * std::exp(lambda0 * y) * (std::expm1(a) - a);
  };
  const auto bp = kernel.breakpoints();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) sum += numerics::gauss_legendre(g, bp[i], bp[i + 1], 32);
  return sum / (lambda0 * lambda0);
}

std::vector<ConstraintCheck> check_constraints(const SupersolParams& p) {
  std::vector<ConstraintCheck> out;
  auto add = [&](std::string name, bool ok, std::string detail) { out.push_back({std::move(name), ok, std::move(detail)}); };
  const double l1 = p.lambda1, l2 = p.lambda2;
  if (!nonlocal(p)) {
    add("lambda1", -p.c * l1 - l1 * l1 + p.K2 < 0.0 && l1 > p.K2,
        "-c lambda1 - lambda1^2 + K2 = " + fmt(-p.c * l1 - l1 * l1 + p.K2) + ", lambda1 - K2 = " + fmt(l1 - p.K2));
    add("lambda2", l2 > 0.0 && l2 < p.mu && l2 * l2 + p.c * l2 - p.K3 < 0.0,
        "lambda2 = " + fmt(l2) + ", mu = " + fmt(p.mu) + ", lambda2^2 + c lambda2 - K3 = " +
            fmt(l2 * l2 + p.c * l2 - p.K3));
    add("delta2", p.delta2 > 1.0 / l1 && p.delta2 < 1.0 / p.K2,
        "delta2 = " + fmt(p.delta2) + " in (" + fmt(1.0 / l1) + ", " + fmt(1.0 / p.K2) + ")");
  } else {
    add("lambda1", -p.c * l1 + 1.0 + p.K2 < 0.0 && l1 > 4.0 * p.K2 / p.c,
        "-c0 lambda1 + 1 + K2 = " + fmt(-p.c * l1 + 1.0 + p.K2) + ", lambda1 - 4 K2 / c0 = " + fmt(l1 - 4.0 * p.K2 / p.c));
    const double g = 1.0 + p.K3 - std::exp(l2 * p.L) - p.c * l2;
    add("lambda2", l2 > 0.0 && l2 < p.mu && g > 0.0,
        "lambda2 = " + fmt(l2) + ", mu = " + fmt(p.mu) + ", 1 + K3 - e^{lambda2 L} - c0 lambda2 = " + fmt(g));
    const double hi = p.c / (4.0 * p.K2);
    add("delta2", p.delta2 > 1.0 / l1 && p.delta2 < hi,
        "delta2 = " + fmt(p.delta2) + " in (" + fmt(1.0 / l1) + ", " + fmt(hi) + ")");
    add("delta4_bounds", p.delta4 < p.c / (2.0 * p.L) && p.delta4 < std::pow(2.0 * p.K2 / (p.eps3 * p.L * p.L), 0.25),
        "delta4 = " + fmt(p.delta4) + ", c0 / 2L = " + fmt(p.c / (2.0 * p.L)));
  }
  add("delta1", delta1_condition(p, p.delta1) && corner1_margin(p, p.delta1) > 0.0,
      "delta1 = " + fmt(p.delta1) + ", corner margin = " + fmt(corner1_margin(p, p.delta1)));
  add("delta3", p.delta3 > 0.0 && p.delta4 * p.delta3 < 0.5 * std::numbers::pi,
      "delta3 = " + fmt(p.delta3) + ", delta4 delta3 = " + fmt(p.delta4 * p.delta3));
  add("delta4", p.delta4 > 0.0 && step3_margin(p, p.delta4) > 0.0 && corner2_margin(p, p.delta4) > 0.0,
      "delta4 = " + fmt(p.delta4) + ", step-3 margin = " + fmt(step3_margin(p, p.delta4)) +
          ", corner margin = " + fmt(corner2_margin(p, p.delta4)));
  add("eps1", p.eps1 > 0.0 && p.eps1 <= 0.01 * p.A_hat * (1.0 + 1e-12),
      "eps1 = " + fmt(p.eps1) + ", 0.01 A = " + fmt(0.01 * p.A_hat));
  SupersolParams q = p;
  fill_eps(q);
  add("eps_continuity",
      rel_close(q.eps2, p.eps2, 1e-12) && rel_close(q.eps3, p.eps3, 1e-12) && rel_close(q.eps4, p.eps4, 1e-12),
      "eps2 = " + fmt(p.eps2) + ", eps3 = " + fmt(p.eps3) + ", eps4 = " + fmt(p.eps4));
  add("xi_order", p.xi2 + p.delta2 < p.xi1 + p.delta1, "xi2 + delta2 = " + fmt(p.xi2 + p.delta2) +
                                                          ", xi1 + delta1 = " + fmt(p.xi1 + p.delta1));
  return out;
}

SupersolParams auto_params(const WaveProfile& profile, const SpectralData& spectral, const FamilySpec& family,
                           double s, double delta0, const ParamOverrides& ov) {
  if (!(delta0 >= 0.0)) throw PreconditionError("auto_params: delta0 must be >= 0");
  DecayResult d;
  try {
    d = fit_decay(profile, spectral);
  } catch (const Unclassified& e) {
    throw PreconditionError(std::string("auto_params needs a pulled front: ") + e.what());
  }
  if (d.front.kind != FrontKind::Pulled || !(d.fit.A_hat > 0.0))
    throw PreconditionError("auto_params needs a pulled front (A > 0); got " + to_string(d.front.kind) + ": " +
                            d.front.evidence);
  const SupersolConstants k = estimate_constants(profile, family, s);

  SupersolParams p;
  p.mode = profile.mode;
  p.c = profile.c;
  p.lambda0 = spectral.lambda0;
  p.L = profile.kernel.is_local() ? 0.0 : profile.kernel.L();
  p.mu = mu_root(profile.kernel, family.df(1.0, s), profile.c);
  p.xi1 = k.xi1;
  p.xi2 = k.xi2;
  p.delta0 = delta0;
  p.K1 = k.K1;
  p.K2 = k.K2;
  p.K3 = k.K3;
  p.L0 = k.L0;
  p.A_hat = d.fit.A_hat;
  if (nonlocal(p)) p.K4 = nonlocal_k4(profile.kernel, p.lambda0);

  if (!nonlocal(p)) p.lambda1 = std::max(2.0 * p.K2, 1.0 + std::sqrt(1.0 + p.K2)) + 1.0;
  else p.lambda1 = std::max(4.0 * p.K2 / p.c, (1.0 + p.K2) / p.c) + 1.0;
  if (ov.lambda1) p.lambda1 = *ov.lambda1;

  double root = 0.0;
  if (!nonlocal(p)) {
    root = -0.5 * p.c + std::sqrt(0.25 * p.c * p.c + p.K3);
  } else {
    auto g = [&](double l) { return 1.0 + p.K3 - std::exp(l * p.L) - p.c * l; };
    double hi = 1.0;
    while (g(hi) > 0.0) hi *= 2.0;
    root = numerics::bisect(g, 0.0, hi, 1e-14);
  }
  p.lambda2 = std::min(0.5 * p.mu, 0.5 * root);

  p.delta1 = 0.1;
  while (!(delta1_condition(p, p.delta1) && corner1_margin(p, p.delta1) > 0.0)) {
    p.delta1 *= 0.8;
    if (p.delta1 < 1e-8) throw ConfigError("auto_params: no delta1 satisfies the corner condition at xi1 + delta1");
  }

  const double d2_lo = 1.0 / p.lambda1;
  const double d2_hi = nonlocal(p) ? p.c / (4.0 * p.K2) : 1.0 / p.K2;
  bool valid = true;
  if (!(d2_lo < d2_hi)) {
    if (!ov.allow_invalid)
      throw ConfigError("auto_params: empty delta2 interval (" + fmt(d2_lo) + ", " + fmt(d2_hi) +
                        "); lambda1 = " + fmt(p.lambda1) + " does not exceed the required bound");
    valid = false;
  }
  p.delta2 = 0.5 * (d2_lo + d2_hi);
  p.delta3 = p.delta2;

  double sup = 0.0;
  for (std::size_t i = 0; i < profile.xi.size(); ++i)
    if (profile.xi[i] >= p.xi1 + p.delta1 && profile.W[i] > 0.0)
      sup = std::max(sup, sigma_at(p, profile.xi[i], 0) * std::exp(-p.lambda0 * profile.xi[i]) / profile.W[i]);
  p.eps1 = 0.01 * p.A_hat;
  if (sup > 0.0) p.eps1 = std::min(p.eps1, 0.5 / sup);

  p.delta4 = 0.1;
  auto delta4_ok = [&](double d4) {
    if (nonlocal(p) && !(d4 < p.c / (2.0 * p.L))) return false;
    return step3_margin(p, d4) > 0.0 && corner2_margin(p, d4) > 0.0;
  };
  while (!delta4_ok(p.delta4)) {
    p.delta4 *= 0.5;
    if (p.delta4 < 1e-8) {
      if (!ov.allow_invalid) throw ConfigError("auto_params: no delta4 satisfies the Step-3 inequalities");
      valid = false;
      break;
    }
  }
  fill_eps(p);
  p.validated = valid && !ov.lambda1;
  return p;
}

PiecewiseBump::PiecewiseBump(SupersolParams params) : p_(params) {}

std::vector<double> PiecewiseBump::junctions() const {
  return {p_.xi1 + p_.delta1, p_.xi2 + p_.delta2, p_.xi2 - p_.delta3};
}

int PiecewiseBump::piece(double x) const {
  if (x >= p_.xi1 + p_.delta1) return 1;
  if (x >= p_.xi2 + p_.delta2) return 2;
  if (x >= p_.xi2 - p_.delta3) return 3;
  return 4;
}

double PiecewiseBump::sigma(double x) const { return sigma_at(p_, x, 0); }
double PiecewiseBump::sigma_d1(double x) const { return sigma_at(p_, x, 1); }
double PiecewiseBump::sigma_d2(double x) const { return sigma_at(p_, x, 2); }

double PiecewiseBump::value(double x) const { return value(x, piece(x)); }

double PiecewiseBump::value(double x, int pc) const {
  switch (pc) {
    case 1: return p_.eps1 * sigma(x) * std::exp(-p_.lambda0 * x);
    case 2: return p_.eps2 * std::exp(p_.lambda1 * x);
    case 3: return p_.eps3 * std::sin(p_.delta4 * (x - p_.xi2));
    default: return -p_.eps4 * std::exp(p_.lambda2 * x);
  }
}

double PiecewiseBump::derivative(double x, int pc) const {
  switch (pc) {
    case 1: return p_.eps1 * (sigma_d1(x) - p_.lambda0 * sigma(x)) * std::exp(-p_.lambda0 * x);
    case 2: return p_.lambda1 * p_.eps2 * std::exp(p_.lambda1 * x);
    case 3: return p_.eps3 * p_.delta4 * std::cos(p_.delta4 * (x - p_.xi2));
    default: return -p_.lambda2 * p_.eps4 * std::exp(p_.lambda2 * x);
  }
}

double PiecewiseBump::second_derivative(double x, int pc) const {
  const double l0 = p_.lambda0;
  switch (pc) {
    case 1: return p_.eps1 * (sigma_d2(x) - 2.0 * l0 * sigma_d1(x) + l0 * l0 * sigma(x)) * std::exp(-l0 * x);
    case 2: return p_.lambda1 * p_.lambda1 * p_.eps2 * std::exp(p_.lambda1 * x);
    case 3: return -p_.eps3 * p_.delta4 * p_.delta4 * std::sin(p_.delta4 * (x - p_.xi2));
    default: return -p_.lambda2 * p_.lambda2 * p_.eps4 * std::exp(p_.lambda2 * x);
  }
}

PiecewiseBump build_Rw(const SupersolParams& params, bool validate) {
  if (validate) {
    std::string failed;
    for (const auto& c : check_constraints(params))
      if (!c.ok) failed += (failed.empty() ? "" : "; ") + c.name + " (" + c.detail + ")";
    if (!failed.empty()) throw ConfigError("build_Rw: rejected parameters: " + failed);
  }
  return PiecewiseBump(params);
}

double plateau_location(const WaveProfile& profile, const PiecewiseBump& bump) {
  const auto& p = bump.params();
  // phi > 0 where W* - R < 1
  auto phi = [&](double x) {
    const double g = profile.gap(x);
    if (g <= 0.0) return -1.0;
    return std::log(g) - std::log(p.eps4) - p.lambda2 * x;
  };
  if (!(p.eps4 > 0.0)) return -std::numeric_limits<double>::infinity();
  const double right = p.xi2 - p.delta3;
  if (phi(right) <= 0.0) return right;
  double step = 1.0, left = right - step;
  while (phi(left) > 0.0) {
    step *= 2.0;
    left = right - step;
    if (step > 1e6) throw NonconvergenceError("plateau_location: W* - R does not reach 1");
  }
  return numerics::bisect(phi, left, right, 1e-10);
}

Grid1D verification_grid(const WaveProfile& profile, const PiecewiseBump& bump) {
  const auto& p = bump.params();
  const double a = plateau_location(profile, bump) - 1.0;
  const double b = profile.xi.back();
  const double shortest = std::min({p.delta2 + p.delta3, (p.xi1 + p.delta1) - (p.xi2 + p.delta2),
                                    b - (p.xi1 + p.delta1), (p.xi2 - p.delta3) - a});
  if (!(shortest > 0.0)) throw PreconditionError("verification_grid: a piece has no extent inside the profile");
  return Grid1D::span(a, b, std::min(0.01, shortest / 200.0));
}

VerificationReport verify(const WaveProfile& profile, const PiecewiseBump& bump, const FamilySpec& family, double s,
                          double delta0, const Grid1D& grid, std::vector<VerifySample>* samples) {
  const auto& p = bump.params();
  const bool nl = nonlocal(p);
  VerificationReport rep;
  rep.delta0 = delta0;
  rep.constraints = check_constraints(p);

  std::vector<int> count(5, 0);
  for (int i = 0; i < grid.n; ++i) ++count[static_cast<std::size_t>(bump.piece(grid.x(i)))];
  for (int pc = 1; pc <= 4; ++pc)
    if (count[static_cast<std::size_t>(pc)] < 100)
      throw PreconditionError("verify: piece " + std::to_string(pc) + " holds " +
                              std::to_string(count[static_cast<std::size_t>(pc)]) +
                              " grid points; at least 100 are required");

  // R~ = W* - W-bar = max(R, W* - 1)
  auto rtilde = [&](double x, int pc, bool& plateau) {
    const double r = bump.value(x, pc);
    const double g = profile.gap(x);
    plateau = g + r <= 0.0;
    return plateau ? -g : r;
  };

  std::vector<double> base(static_cast<std::size_t>(grid.n)), slope(base.size());
  std::vector<int> owner(base.size());
  std::vector<double> breaks = bump.junctions();
  rep.plateau_xi = plateau_location(profile, bump);
  breaks.push_back(rep.plateau_xi);
  const auto kbp = nl ? profile.kernel.breakpoints() : std::vector<double>{};

  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    const int pc = bump.piece(x);
    bool plateau = false;
    const double rt = rtilde(x, pc, plateau);
    const double ws = plateau ? 1.0 - profile.gap(x) : profile.value(x);
    const double wbar = plateau ? 1.0 : ws - rt;
    double b = 0.0;
    if (!nl) {
      if (!plateau) {
        const double dd = -rt * family.divided_difference(wbar, ws, s);
        b = -bump.second_derivative(x, pc) - p.c * bump.derivative(x, pc) + dd;
      }
    } else {
      const double drt = plateau ? profile.derivative(x) : bump.derivative(x, pc);
      // J * R~ on [-L, L], split where R~ or J loses smoothness
      std::vector<double> cuts = kbp;
      for (double bk : breaks)
        if (std::abs(x - bk) < p.L) cuts.push_back(x - bk);
      std::sort(cuts.begin(), cuts.end());
      double conv = 0.0;
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (cuts[k + 1] - cuts[k] <= 0.0) continue;
        conv += numerics::gauss_legendre(
            [&](double y) {
              bool pl = false;
              return profile.kernel.density(y) * rtilde(x - y, bump.piece(x - y), pl);
            },
            cuts[k], cuts[k + 1], 2);
      }
      const double dd = -rt * family.divided_difference(wbar, ws, s);
      b = -conv + rt - p.c * drt + dd;
    }
    const auto I = static_cast<std::size_t>(i);
    base[I] = b;
    slope[I] = family.ds(wbar);
    owner[I] = pc;
    if (samples) samples->push_back({x, ws, bump.value(x, pc), wbar, b + delta0 * slope[I]});
  }

  auto pieces_at = [&](double d0) {
    std::vector<PieceResidual> out(4);
    for (int pc = 1; pc <= 4; ++pc) {
      out[static_cast<std::size_t>(pc - 1)].piece = pc;
      out[static_cast<std::size_t>(pc - 1)].max_residual = -std::numeric_limits<double>::infinity();
    }
    for (std::size_t i = 0; i < base.size(); ++i) {
      auto& pr = out[static_cast<std::size_t>(owner[i] - 1)];
      const double r = base[i] + d0 * slope[i];
      ++pr.points;
      if (r > pr.max_residual) {
        pr.max_residual = r;
        pr.at = grid.x(static_cast<int>(i));
      }
    }
    for (auto& pr : out) pr.ok = pr.max_residual <= rep.tolerance;
    return out;
  };
  auto residuals_ok = [&](double d0) {
    const auto pr = pieces_at(d0);
    return std::all_of(pr.begin(), pr.end(), [](const PieceResidual& r) { return r.ok; });
  };
  rep.pieces = pieces_at(delta0);

  const auto js = bump.junctions();
  const int right_piece[3] = {1, 2, 3};
  for (int j = 0; j < 3; ++j) {
    CornerCheck cc;
    cc.at = js[static_cast<std::size_t>(j)];
    cc.dR_right = bump.derivative(cc.at, right_piece[j]);
    cc.dR_left = bump.derivative(cc.at, right_piece[j] + 1);
    cc.ok = cc.dR_right >= cc.dR_left;
    rep.corners.push_back(cc);
    const double vr = bump.value(cc.at, right_piece[j]), vl = bump.value(cc.at, right_piece[j] + 1);
    const double scale = std::max(std::abs(vr), std::abs(vl));
    rep.continuity_jump = std::max(rep.continuity_jump, scale > 0.0 ? std::abs(vr - vl) / scale : 0.0);
  }

  for (double x = std::max(js[0], 1.0); x <= js[0] + 200.0; x += 0.5)
    rep.tail_ratio = std::max(rep.tail_ratio, bump.value(x, 1) / (x * std::exp(-p.lambda0 * x)));

  const bool corners_ok = std::all_of(rep.corners.begin(), rep.corners.end(), [](const CornerCheck& c) { return c.ok; });
  const bool constraints_ok =
      std::all_of(rep.constraints.begin(), rep.constraints.end(), [](const ConstraintCheck& c) { return c.ok; });
  const bool continuity_ok = rep.continuity_jump <= 1e-12;
  rep.pass = corners_ok && constraints_ok && continuity_ok && residuals_ok(delta0);

  for (const auto& pr : rep.pieces)
    if (!pr.ok && rep.failure.empty())
      rep.failure = "piece " + std::to_string(pr.piece) + " residual " + fmt(pr.max_residual) + " > " +
                    fmt(rep.tolerance) + " at xi = " + fmt(pr.at);
  for (const auto& c : rep.corners)
    if (!c.ok && rep.failure.empty())
      rep.failure = "corner at xi = " + fmt(c.at) + " bends the wrong way (R'(+) = " + fmt(c.dR_right) +
                    " < R'(-) = " + fmt(c.dR_left) + ")";
  if (!continuity_ok) rep.failure = "R is discontinuous at a junction (relative jump " + fmt(rep.continuity_jump) + ")";
  for (const auto& c : rep.constraints)
    if (!c.ok && rep.failure.empty()) rep.failure = "constraint " + c.name + " fails: " + c.detail;

  if (corners_ok && constraints_ok && continuity_ok) {
    double d = delta0 > 0.0 ? delta0 : 1e-6;
    double lo = 0.0, hi = 0.0;
    if (residuals_ok(d)) {
      while (d < 1e3 && residuals_ok(2.0 * d)) d *= 2.0;
      lo = d;
      hi = 2.0 * d;
    } else {
      while (d > 1e-30 && !residuals_ok(d)) d *= 0.5;
      if (residuals_ok(d)) {
        lo = d;
        hi = 2.0 * d;
      }
    }
    if (lo > 0.0 && lo < 1e3)
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (residuals_ok(mid) ? lo : hi) = mid;
      }
    rep.max_delta0 = lo;
  }
  return rep;
}

}  // namespace frontlab
