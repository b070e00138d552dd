#include <cmath>

#include "doctest.h"
#include "frontlab/errors.hpp"
#include "frontlab/selection.hpp"

using namespace frontlab;

namespace {

const FamilySpec kHR = FamilySpec::hadeler_rothe();

double hr_speed(double s) { return s <= 2.0 ? 2.0 : std::sqrt(2.0 / s) + std::sqrt(s / 2.0); }

}  // namespace

TEST_CASE("speed curve on the HR family") {
  const std::vector<double> s_list{0.5, 1.0, 2.0, 3.0, 4.0, 8.0};
  SelectionOptions o;
  o.threads = 3;
  const auto rows = speed_curve(kHR, KernelSpec::local(), s_list, o);
  REQUIRE(rows.size() == s_list.size());
  double prev = 0.0;
  for (const auto& r : rows) {
    CAPTURE(r.s);
    CHECK(std::abs(r.c_star - hr_speed(r.s)) <= 1e-3);
    CHECK(r.c_star >= prev - 1e-6);
    prev = r.c_star;
    // dichotomy between speed excess and decay class
    REQUIRE(r.kind);
    if (std::abs(r.c_star - 2.0) <= 5e-3)
      CHECK((*r.kind == FrontKind::Pulled || *r.kind == FrontKind::Transition));
    else
      CHECK(*r.kind == FrontKind::Pushed);
  }
  CHECK(std::abs(rows[3].c_star - 2.04124) <= 1e-3);

  // thread count does not change the result
  const auto serial = speed_curve(kHR, KernelSpec::local(), s_list);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(serial[i].c_star == rows[i].c_star);
    CHECK(serial[i].fit.lambda_hat == rows[i].fit.lambda_hat);
  }
}

TEST_CASE("speed curve edge cases") {
  const auto one = speed_curve(kHR, KernelSpec::local(), {2.0});
  REQUIRE(one.size() == 1);
  REQUIRE(one[0].kind);
  CHECK(*one[0].kind == FrontKind::Transition);
  CHECK(speed_curve(kHR, KernelSpec::local(), {}).empty());
  CHECK_THROWS_AS(speed_curve(kHR, KernelSpec::local(), {2.0, 1.0}), PreconditionError);
}

TEST_CASE("local threshold") {
  const auto r = find_threshold(kHR, KernelSpec::local(), 0.0, 8.0, 0.02);
  CHECK(std::abs(r.s_star - 2.0) <= 0.05);
  CHECK(r.s_hi - r.s_lo <= 0.02);
  REQUIRE(r.transition);
  CHECK(class_label(*r.transition) == "Transition");
  for (std::size_t i = 1; i < r.curve.size(); ++i) CHECK(r.curve[i].c_star >= r.curve[i - 1].c_star - 1e-6);
  const auto cert = transition_certificate(r);
  CHECK(cert.pass);
  CHECK(cert.notes.empty());
  REQUIRE(cert.probes.size() == 3);
  CHECK(cert.probes[0].s == doctest::Approx(r.s_star - 0.1));
}

TEST_CASE("spec-default speed excess is too coarse for the HR threshold") {
  // c*(s) = 2 + 5e-3 at s ~ 2.30: the excess predicate lags the transition
  const auto r = find_threshold(kHR, KernelSpec::local(), 0.0, 8.0, 0.02, 5e-3);
  CHECK(r.s_star > 2.25);
  CHECK(r.s_star < 2.35);
}

TEST_CASE("threshold bracket violations") {
  CHECK_THROWS_AS(find_threshold(kHR, KernelSpec::local(), 3.0, 8.0, 0.02), AssumptionViolation);
  CHECK_THROWS_AS(find_threshold(kHR, KernelSpec::local(), 0.0, 1.0, 0.02), AssumptionViolation);
  CHECK_THROWS_AS(find_threshold(kHR, KernelSpec::local(), 4.0, 1.0, 0.02), PreconditionError);
}

TEST_CASE("certificate with clamped probes and a false bracket") {
  auto r = find_threshold(kHR, KernelSpec::local(), 1.9, 2.2, 0.1);
  const auto cert = transition_certificate(r);
  CHECK(cert.notes.size() == 2);
  CHECK(cert.probes[0].s == doctest::Approx(1.9));
  CHECK(cert.probes[2].s == doctest::Approx(2.2));

  // a result whose s_star is far from the transition fails with evidence
  ThresholdResult fake = r;
  fake.s_star = 5.0;
  fake.range_lo = 0.0;
  fake.range_hi = 8.0;
  fake.transition = evaluate_point(kHR, KernelSpec::local(), linear_speed(KernelSpec::local(), 1.0), 5.0, 1e-8);
  const auto bad = transition_certificate(fake);
  CHECK_FALSE(bad.pass);
  CHECK_FALSE(bad.probes[1].ok);
  CHECK_FALSE(bad.probes[1].point.evidence.empty());
}

TEST_CASE("nonlocal threshold") {
  const auto box = KernelSpec::box(1.0);
  SelectionOptions o;
  o.threads = 4;
  const auto r = find_threshold(kHR, box, 0.0, 6.0, 0.05, 1e-6, o);
  REQUIRE(r.transition);
  CHECK(class_label(*r.transition) == "Transition");
  CHECK(r.transition->fit.B_hat > 0.0);
  const auto cert = transition_certificate(r);
  CHECK(cert.pass);

  // dense scan: the first q with a speed excess lies in the final bracket, up to the scan spacing
  std::vector<double> qs;
  for (double q = 2.2; q <= 2.6 + 1e-12; q += 0.025) qs.push_back(q);
  const auto rows = speed_curve(kHR, box, qs, o);
  double first = 0.0;
  for (const auto& row : rows)
    if (row.c_star > r.c_lin + 1e-6) {
      first = row.s;
      break;
    }
  CHECK(first >= r.s_lo - 1e-9);
  CHECK(first <= r.s_hi + 0.025);
}
