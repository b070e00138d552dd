#include <cmath>
#include <random>

#include "doctest.h"
#include "frontlab/dispersal.hpp"
#include "frontlab/errors.hpp"

using namespace frontlab;

namespace {

// Composite Simpson rule; deliberately a different quadrature than the library uses.
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Ternary search on a unimodal function; oracle for the golden-section path.
template <class F>
double ternary_argmin(F f, double a, double b) {
  for (int i = 0; i < 300; ++i) {
    const double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
    if (f(m1) < f(m2)) b = m2; else a = m1;
  }
  return 0.5 * (a + b);
}

// Values computed with 30-digit arithmetic: tanh(l) = l/2 and sinh(l)/l^2.
constexpr double kBoxLambda0 = 1.915008048154537;
constexpr double kBoxC0 = 0.9052617393690583;

}  // namespace

TEST_CASE("mgf of the box kernel") {
  const auto box = KernelSpec::box(1.0);
  CHECK(mgf(box, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  const double oracle = simpson([](double x) { return 0.5 * std::exp(x); }, -1.0, 1.0);
  CHECK(mgf(box, 1.0) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(mgf(box, 1.0) == doctest::Approx(1.17520).epsilon(1e-5));
  CHECK(mgf(box, -1.0) == doctest::Approx(mgf(box, 1.0)).epsilon(1e-15));
}

TEST_CASE("closed-form mgf agrees with the quadrature path for every analytic kind") {
  for (const auto& k : {KernelSpec::box(0.7), KernelSpec::triangle(1.3), KernelSpec::cosine_bump(2.0)}) {
    for (double lam : {-3.0, -0.4, 1e-6, 0.5, 2.0, 6.0}) {
      CAPTURE(to_string(k.kind()));
      CAPTURE(lam);
      const double q = simpson([&](double y) { return k.density(y) * std::exp(lam * y); }, -k.L(), k.L());
      CHECK(mgf(k, lam) == doctest::Approx(q).epsilon(1e-10));
      CHECK(mgf_moment(k, lam, 0) == doctest::Approx(q).epsilon(1e-12));
    }
    CHECK(simpson([&](double y) { return k.density(y); }, -k.L(), k.L()) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("mgf is undefined for the Local kind") {
  CHECK_THROWS_AS(mgf(KernelSpec::local(), 1.0), UnsupportedOperation);
}

TEST_CASE("tabulated kernels") {
  SUBCASE("a tabulated triangle reproduces the analytic one") {
    std::vector<std::pair<double, double>> samples;
    for (int i = -10; i <= 10; ++i) {
      const double x = i / 10.0;
      samples.emplace_back(x, 1.0 - std::abs(x));
    }
    const auto tab = KernelSpec::tabulated(samples);
    const auto tri = KernelSpec::triangle(1.0);
    for (double lam : {0.0, 0.8, 2.5}) CHECK(mgf(tab, lam) == doctest::Approx(mgf(tri, lam)).epsilon(1e-12));
    CHECK(linear_speed(tab, 1.0).c0_star == doctest::Approx(linear_speed(tri, 1.0).c0_star).epsilon(1e-10));
  }
  SUBCASE("mass within 1% is renormalized") {
    const auto tab = KernelSpec::tabulated({{-1, 0.0}, {0, 1.005}, {1, 0.0}});
    CHECK(mgf(tab, 0.0) == doctest::Approx(1.0).epsilon(1e-13));
  }
  SUBCASE("mass off by more than 1% is rejected") {
    CHECK_THROWS_AS(KernelSpec::tabulated({{-1, 0.0}, {0, 1.2}, {1, 0.0}}), ConfigError);
  }
  SUBCASE("asymmetric or unordered tables are rejected") {
    CHECK_THROWS_AS(KernelSpec::tabulated({{-1, 0.0}, {0, 1.0}, {0.5, 0.5}, {1, 0.2}}), ConfigError);
    CHECK_THROWS_AS(KernelSpec::tabulated({{-1, 0.0}, {1, 1.0}, {0, 0.0}}), ConfigError);
  }
}

TEST_CASE("linear_speed") {
  SUBCASE("local closed form") {
    auto sd = linear_speed(KernelSpec::local(), 1.0);
    CHECK(sd.c0_star == 2.0);
    CHECK(sd.lambda0 == 1.0);
    sd = linear_speed(KernelSpec::local(), 4.0);
    CHECK(sd.c0_star == 4.0);
    CHECK(sd.lambda0 == 2.0);
  }
  SUBCASE("box kernel against independent oracles") {
    const auto sd = linear_speed(KernelSpec::box(1.0), 1.0);
    const double lam_ternary = ternary_argmin([](double l) { return std::sinh(l) / (l * l); }, 0.1, 10.0);
    double lo = 1.0, hi = 3.0;  // tanh(l) = l/2 by bisection
    for (int i = 0; i < 200; ++i) {
      const double m = 0.5 * (lo + hi);
      (std::tanh(m) - m / 2 > 0 ? lo : hi) = m;
    }
    CHECK(sd.lambda0 == doctest::Approx(lo).epsilon(1e-12));
    CHECK(sd.lambda0 == doctest::Approx(lam_ternary).epsilon(1e-6));
    CHECK(sd.lambda0 == doctest::Approx(kBoxLambda0).epsilon(1e-12));
    CHECK(sd.c0_star == doctest::Approx(kBoxC0).epsilon(1e-12));
    // identity h(lambda0) = c0 lambda0 and first-moment certificate
    CHECK(std::abs(h_value(KernelSpec::box(1.0), 1.0, sd.lambda0) - sd.c0_star * sd.lambda0) <= 1e-10);
    CHECK(sd.stationarity_residual <= 1e-8);
  }
  SUBCASE("strict interior minimum") {
    const auto k = KernelSpec::cosine_bump(1.5);
    const auto sd = linear_speed(k, 0.7);
    for (double eps : {1e-3, 1e-2})
      for (double l : {sd.lambda0 - eps, sd.lambda0 + eps}) CHECK(h_value(k, 0.7, l) / l > sd.c0_star);
  }
  SUBCASE("diffusive rescaling approaches the local speed") {
    // (J_e * w - w)/e^2 with Var J_e = 2e^2 maps to a variance-2 box with gamma0 = e^2
    // and speed c0/e in the original units.
    const auto box = KernelSpec::box(std::sqrt(6.0));
    double prev_gap = std::numeric_limits<double>::infinity();
    for (double e : {0.5, 0.25, 0.125}) {
      const double c = linear_speed(box, e * e).c0_star / e;
      const double gap = std::abs(c - 2.0);
      CHECK(gap < prev_gap);
      prev_gap = gap;
    }
    CHECK(prev_gap < 0.01);
  }
  SUBCASE("bad gamma0") { CHECK_THROWS_AS(linear_speed(KernelSpec::box(1.0), 0.0), DomainError); }
}

TEST_CASE("lambda_roots") {
  SUBCASE("local quadratic oracle") {
    auto [lm, lp] = lambda_roots(KernelSpec::local(), 1.0, 2.5);
    CHECK(lm == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(lp == doctest::Approx(2.0).epsilon(1e-14));
    std::tie(lm, lp) = lambda_roots(KernelSpec::local(), 1.0, 2.0);
    CHECK(lm == 1.0);
    CHECK(lp == 1.0);
    CHECK_THROWS_AS(lambda_roots(KernelSpec::local(), 1.0, 1.9), NoRealRoot);
  }
  SUBCASE("box kernel at c = 1") {
    const auto box = KernelSpec::box(1.0);
    const auto [lm, lp] = lambda_roots(box, 1.0, 1.0);
    CHECK(lm < kBoxLambda0);
    CHECK(lp > kBoxLambda0);
    CHECK(std::abs(h_value(box, 1.0, lm) - lm) <= 1e-10);
    CHECK(std::abs(h_value(box, 1.0, lp) - lp) <= 1e-10);
    CHECK(lm == doctest::Approx(1.3132837183534836).epsilon(1e-10));
    CHECK(lp == doctest::Approx(2.6392495138985532).epsilon(1e-10));
  }
  SUBCASE("double root at the linear speed") {
    const auto box = KernelSpec::box(1.0);
    const auto [lm, lp] = lambda_roots(box, 1.0, kBoxC0);
    CHECK(lm == lp);
    CHECK(lm == doctest::Approx(kBoxLambda0).epsilon(1e-12));
    CHECK_THROWS_AS(lambda_roots(box, 1.0, kBoxC0 - 1e-6), NoRealRoot);
  }
  SUBCASE("random speeds above c0*") {
    const auto k = KernelSpec::triangle(1.0);
    const auto sd = linear_speed(k, 1.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uc(sd.c0_star * (1 + 1e-6), 3 * sd.c0_star);
    for (int i = 0; i < 20; ++i) {
      const double c = uc(rng);
      const auto [lm, lp] = lambda_roots(k, 1.0, c);
      CHECK(std::abs(h_value(k, 1.0, lm) - c * lm) <= 1e-9);
      CHECK(std::abs(h_value(k, 1.0, lp) - c * lp) <= 1e-9);
      CHECK(lm < sd.lambda0);
      CHECK(sd.lambda0 < lp);
    }
  }
}

TEST_CASE("mu_root") {
  CHECK(mu_root(KernelSpec::local(), -9.0, 2.5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(mu_root(KernelSpec::local(), -3.0, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  // matches sqrt(1 - f'(1)) - 1 at c = 2
  CHECK(mu_root(KernelSpec::local(), -2.0, 2.0) == doctest::Approx(std::sqrt(3.0) - 1.0).epsilon(1e-14));

  const auto box = KernelSpec::box(1.0);
  const double r = mu_root(box, -1.0, 1.0);
  CHECK(r > 0.0);
  CHECK(std::abs(mgf(box, r) - 1.0 - 1.0 + r) < 1e-10);
  CHECK(r == doctest::Approx(0.8692295795254481).epsilon(1e-10));

  CHECK_THROWS_AS(mu_root(box, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(mu_root(KernelSpec::local(), 0.5, 1.0), DomainError);

  double prev = 0.0;
  for (double f1 : {-0.1, -0.5, -1.0, -2.0, -5.0}) {
    const double m = mu_root(box, f1, 0.9);
    CHECK(m > prev);
    prev = m;
  }
}
