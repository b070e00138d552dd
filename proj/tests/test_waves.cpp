#include <cmath>

#include "doctest.h"
#include "frontlab/cauchy.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/waves.hpp"

using namespace frontlab;

namespace {

const FamilySpec kHR = FamilySpec::hadeler_rothe();

double hr_speed(double s) { return s <= 2.0 ? 2.0 : std::sqrt(2.0 / s) + std::sqrt(s / 2.0); }

// Closed-form pushed front of the HR family for s >= 2, pinned at W(0) = 1/2.
double hr_exact(double s, double x) { return 1.0 / (1.0 + std::exp(std::sqrt(s / 2.0) * x)); }

// Residual of J*W - W + cW' + f evaluated through the interpolant with a fine
// composite Simpson rule, independent of the solver's quadrature weights.
double nonlocal_residual_at(const WaveProfile& p, double x) {
  const double L = p.kernel.L();
  const int n = 400;
  const double h = 2.0 * L / n;
  double conv = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double y = -L + k * h;
    const double wgt = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    conv += wgt * p.kernel.density(y) * p.value(x - y);
  }
  conv *= h / 3.0;
  const double w = p.value(x);
  return conv - w + p.c * p.derivative(x) + p.family.f(w, p.s);
}

}  // namespace

TEST_CASE("local wave matches the closed-form pushed front") {
  for (double s : {3.0, 4.0, 8.0}) {
    CAPTURE(s);
    const auto out = solve_wave_local(kHR, s, hr_speed(s));
    REQUIRE(out);
    const auto& p = *out.profile;
    CHECK(p.residual <= 1e-8);
    double err = 0.0;
    for (std::size_t i = 0; i < p.xi.size(); ++i) err = std::max(err, std::abs(p.W[i] - hr_exact(s, p.xi[i])));
    CHECK(err <= 1e-8);
    CHECK(std::abs(p.value(0.0) - 0.5) <= 1e-12);
  }
}

TEST_CASE("local wave below the minimal speed does not exist") {
  const auto out = solve_wave_local(kHR, 8.0, 2.3);
  CHECK_FALSE(out);
  CHECK_FALSE(out.reason.empty());
  CHECK_THROWS_AS(solve_wave_local(kHR, 1.0, 1.9), PreconditionError);
  CHECK_THROWS_AS(solve_wave(kHR, 8.0, 2.3, KernelSpec::local()), InadmissibleProfile);
}

TEST_CASE("local minimal speed") {
  for (double s : {0.5, 1.0, 2.0, 3.0, 4.0, 8.0}) {
    CAPTURE(s);
    CHECK(std::abs(minimal_speed_local(kHR, s) - hr_speed(s)) <= 1e-6);
  }
  CHECK(std::abs(minimal_speed_local(kHR, 8.0) - 2.5) <= 1e-4);
  CHECK(std::abs(minimal_speed_local(kHR, 4.0) - 2.12132) <= 1e-4);
  CHECK_THROWS_AS(minimal_speed_local(kHR, 1.0, 1e-9), PreconditionError);
}

TEST_CASE("local minimal speed is nondecreasing in s") {
  double prev = 0.0;
  for (double s = 0.0; s <= 6.0; s += 0.5) {
    const double c = minimal_speed_local(kHR, s);
    CHECK(c >= prev - 1e-8);
    prev = c;
  }
}

TEST_CASE("local classification") {
  const auto sd = linear_speed(KernelSpec::local(), 1.0);
  struct Case {
    double s;
    FrontKind kind;
  };
  for (const auto& [s, kind] : {Case{1.0, FrontKind::Pulled}, Case{2.0, FrontKind::Transition},
                                Case{8.0, FrontKind::Pushed}}) {
    CAPTURE(s);
    const auto mw = minimal_wave(kHR, s, KernelSpec::local(), 1e-8);
    const auto d = fit_decay(mw.profile, sd);
    CHECK(d.front.kind == kind);
  }
  // pushed tail rate is sqrt(s/2)
  const auto p = solve_wave(kHR, 8.0, 2.5, KernelSpec::local());
  CHECK(std::abs(fit_tail(p).lambda_hat - 2.0) <= 0.02);
  // above c*, the slow root lambda_- is selected
  const auto sup = solve_wave(kHR, 1.0, 2.5, KernelSpec::local());
  const auto d = fit_decay(sup, sd);
  CHECK(d.front.kind == FrontKind::Supercritical);
  CHECK(std::abs(d.fit.lambda_hat - 0.5) <= 0.01);
}

TEST_CASE("left tail rate") {
  for (double s : {1.0, 4.0}) {
    const double c = hr_speed(s);
    const auto p = solve_wave(kHR, s, c, KernelSpec::local());
    const double mu = mu_root(KernelSpec::local(), kHR.df(1.0, s), c);
    CHECK(std::abs(fit_left_tail(p).mu_hat / mu - 1.0) <= 0.02);
  }
  const auto box = KernelSpec::box(1.0);
  const double c = 1.2;
  const auto p = solve_wave_nonlocal(kHR, 1.0, c, box);
  const double mu = mu_root(box, kHR.df(1.0, 1.0), c);
  CHECK(std::abs(fit_left_tail(p).mu_hat / mu - 1.0) <= 0.02);
}

TEST_CASE("nonlocal KPP wave at the linear speed") {
  const auto box = KernelSpec::box(1.0);
  const auto sd = linear_speed(box, 1.0);
  const auto p = solve_wave_nonlocal(kHR, 1.0, sd.c0_star, box);
  CHECK(p.residual <= 1e-8);
  CHECK(p.residual == doctest::Approx(profile_residual(p)));
  for (double x : {-3.0, -1.0, 0.0, 0.5, 2.0, 5.0}) {
    CAPTURE(x);
    CHECK(std::abs(nonlocal_residual_at(p, x)) <= 1e-5);
  }
  for (std::size_t i = 1; i < p.W.size(); ++i) CHECK(p.W[i] <= p.W[i - 1] + 1e-10);
  const auto d = fit_decay(p, sd);
  CHECK(d.front.kind == FrontKind::Pulled);
  CHECK(std::abs(d.fit.lambda_hat / sd.lambda0 - 1.0) <= 0.01);
}

TEST_CASE("nonlocal supercritical wave") {
  const auto box = KernelSpec::box(1.0);
  const auto sd = linear_speed(box, 1.0);
  const double c = 1.5 * sd.c0_star;
  const auto p = solve_wave_nonlocal(kHR, 1.0, c, box);
  const auto d = fit_decay(p, sd);
  CHECK(d.front.kind == FrontKind::Supercritical);
  CHECK(std::abs(d.fit.lambda_hat / lambda_roots(box, 1.0, c).first - 1.0) <= 0.01);
}

TEST_CASE("nonlocal minimal speed") {
  const auto box = KernelSpec::box(1.0);
  const auto sd = linear_speed(box, 1.0);
  SUBCASE("KPP regime is pulled at c0*") {
    for (double q : {1.0, 2.0}) {
      const auto mw = minimal_wave_nonlocal(kHR, q, box);
      CHECK(mw.c == doctest::Approx(sd.c0_star).epsilon(1e-9));
      CHECK(fit_decay(mw.profile, sd).front.kind == FrontKind::Pulled);
    }
  }
  SUBCASE("pushed regime") {
    // frozen from this discretization (32 cells per support)
    struct Case {
      double q, c;
    };
    for (const auto& [q, c_frozen] : {Case{3.0, 0.9115208}, Case{4.0, 0.9361279}, Case{6.0, 1.0021472}}) {
      CAPTURE(q);
      const auto mw = minimal_wave_nonlocal(kHR, q, box);
      CHECK(std::abs(mw.c - c_frozen) <= 2e-6);
      CHECK(mw.c > sd.c0_star);
      const auto d = fit_decay(mw.profile, sd);
      CHECK(d.front.kind == FrontKind::Pushed);
      CHECK(std::abs(d.fit.lambda_hat / d.front.lambda_plus - 1.0) <= 0.01);
    }
  }
}

TEST_CASE("nonlocal minimal speed agrees with the Cauchy problem") {
  const auto box = KernelSpec::box(1.0);
  const double q = 4.0;
  const double c_wave = minimal_speed_nonlocal(kHR, q, box);
  const auto g = Grid1D::span(0.0, 260.0, 0.125);
  EvolveOptions eo;
  const auto run = evolve(kHR, q, box, mollified_indicator(g), 250.0, 0.01, 0.5, eo);
  const auto est = estimate_speed(run.track, 150.0, 250.0);
  CHECK(std::abs(est.c_hat / c_wave - 1.0) <= 0.03);
}

TEST_CASE("nonlocal preconditions") {
  const auto box = KernelSpec::box(1.0);
  NewtonOptions o;
  o.cells_per_support = 4;
  CHECK_THROWS_AS(solve_wave_nonlocal(kHR, 1.0, 1.0, box, o), PreconditionError);
  CHECK_THROWS_AS(solve_wave_nonlocal(kHR, 1.0, 0.8, box), PreconditionError);
  CHECK_THROWS_AS(solve_wave_nonlocal(kHR, 1.0, 1.0, KernelSpec::local()), PreconditionError);
}

TEST_CASE("translation invariance") {
  const double shift = 0.37;
  SUBCASE("local") {
    ShootingOptions a, b;
    b.pin_xi = shift;
    const auto p = *solve_wave_local(kHR, 3.0, 2.2, a).profile;
    const auto q = *solve_wave_local(kHR, 3.0, 2.2, b).profile;
    for (double x = -8.0; x <= 8.0; x += 0.25) CHECK(std::abs(p.value(x) - q.value(x + shift)) <= 1e-8);
  }
  SUBCASE("nonlocal") {
    const auto box = KernelSpec::box(1.0);
    NewtonOptions a, b;
    b.pin_xi = shift;
    const auto p = solve_wave_nonlocal(kHR, 1.0, 1.1, box, a);
    const auto q = solve_wave_nonlocal(kHR, 1.0, 1.1, box, b);
    for (double x = -8.0; x <= 8.0; x += 0.25) CHECK(std::abs(p.value(x) - q.value(x + shift)) <= 1e-8);
  }
}

TEST_CASE("short tail is rejected by the fit") {
  auto p = solve_wave(kHR, 1.0, 2.0, KernelSpec::local());
  std::size_t cut = 0;
  while (p.W[cut] > 1e-2) ++cut;
  p.xi.resize(cut + 20);
  p.W.resize(cut + 20);
  p.dW.resize(cut + 20);
  CHECK_THROWS_AS(fit_tail(p), PreconditionError);
}
