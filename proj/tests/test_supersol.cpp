#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "frontlab/errors.hpp"
#include "frontlab/numerics.hpp"
#include "frontlab/supersol.hpp"

using namespace frontlab;

namespace {

const FamilySpec kHR = FamilySpec::hadeler_rothe();

struct Setup {
  WaveProfile profile;
  SpectralData sd;
};

const Setup& local_s1() {
  static const Setup s{minimal_wave(kHR, 1.0, KernelSpec::local(), 1e-8).profile,
                       linear_speed(KernelSpec::local(), 1.0)};
  return s;
}

const Setup& box_q1() {
  static const Setup s{minimal_wave(kHR, 1.0, KernelSpec::box(1.0), 1e-9).profile,
                       linear_speed(KernelSpec::box(1.0), 1.0)};
  return s;
}

bool all_ok(const std::vector<ConstraintCheck>& cs) {
  return std::all_of(cs.begin(), cs.end(), [](const ConstraintCheck& c) { return c.ok; });
}

}  // namespace

TEST_CASE("constants along the HR s=1 minimal wave") {
  const auto k = estimate_constants(local_s1().profile, kHR, 1.0);
  CHECK(k.K3 == doctest::Approx(1.0));
  // sup |f'| on [0, 1] by dense sampling; f'(w) = 1 - 3w^2 at s = 1
  double sup = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double w = i / 100000.0;
    sup = std::max(sup, std::abs((1.0 - 2.0 * w) * (1.0 + w) + w * (1.0 - w)));
  }
  CHECK(k.K2 == doctest::Approx(1.05 * sup).epsilon(1e-6));
  CHECK(k.K2 > 1.0);
  CHECK(k.xi2 < k.xi1);
  CHECK(local_s1().profile.value(k.xi1) < 1e-2);
  CHECK(kHR.df(local_s1().profile.value(k.xi2), 1.0) < -k.K3);

  WaveProfile flat = local_s1().profile;
  std::fill(flat.W.begin(), flat.W.end(), 0.5);
  CHECK_THROWS_AS(estimate_constants(flat, kHR, 1.0), AssumptionViolation);
}

TEST_CASE("auto_params preconditions") {
  for (double s : {2.0, 4.0}) {
    CAPTURE(s);
    const auto mw = minimal_wave(kHR, s, KernelSpec::local(), 1e-8);
    CHECK_THROWS_AS(auto_params(mw.profile, linear_speed(KernelSpec::local(), 1.0), kHR, s, 1e-3), PreconditionError);
  }
  CHECK_THROWS_AS(auto_params(local_s1().profile, local_s1().sd, kHR, 1.0, -1.0), PreconditionError);
  ParamOverrides ov;
  ov.lambda1 = 1.05;
  CHECK_THROWS_AS(auto_params(local_s1().profile, local_s1().sd, kHR, 1.0, 0.0, ov), ConfigError);
}

TEST_CASE("auto_params meets every constraint") {
  for (double d0 : {0.0, 1e-3}) {
    const auto p = auto_params(local_s1().profile, local_s1().sd, kHR, 1.0, d0);
    CHECK(p.validated);
    CHECK(all_ok(check_constraints(p)));
    CHECK(p.lambda1 == doctest::Approx(std::max(2.0 * p.K2, 1.0 + std::sqrt(1.0 + p.K2)) + 1.0));
    CHECK(p.delta2 == doctest::Approx(0.5 * (1.0 / p.lambda1 + 1.0 / p.K2)));
    CHECK(p.eps1 <= 0.01 * p.A_hat * (1.0 + 1e-12));
    // continuity values
    const double x1 = p.xi1 + p.delta1;
    const double sig = 4.0 * std::exp(-0.5 * p.delta1) - 4.0 + 4.0 * p.delta1;
    CHECK(p.eps2 == doctest::Approx(p.eps1 * sig * std::exp(-(1.0 + p.lambda1) * x1)).epsilon(1e-12));
    CHECK(p.eps3 ==
          doctest::Approx(p.eps2 * std::exp(p.lambda1 * (p.xi2 + p.delta2)) / std::sin(p.delta4 * p.delta2))
              .epsilon(1e-12));
  }
}

TEST_CASE("bump shape") {
  const auto p = auto_params(local_s1().profile, local_s1().sd, kHR, 1.0, 0.0);
  const auto b = build_Rw(p);
  CHECK(b.sigma(p.xi1) == 0.0);
  CHECK(b.value(p.xi1, 1) == 0.0);
  for (double at : b.junctions()) {
    const int right = b.piece(at);
    const double vr = b.value(at, right), vl = b.value(at, right + 1);
    CHECK(std::abs(vr - vl) <= 1e-12 * std::max(std::abs(vr), std::abs(vl)));
  }
  for (double x = p.xi2 + 1e-6; x < p.xi1 + 40.0; x += 0.05) CHECK(b.value(x) > 0.0);
  for (double x = p.xi2 - p.delta3 - 1e-6; x > p.xi2 - 60.0; x -= 0.05) CHECK(b.value(x) < 0.0);
  // R / (xi e^{-xi}) tends to 4 eps1 from below on the far tail
  double ratio = 0.0;
  for (double x = 10.0; x < 400.0; x += 1.0) ratio = std::max(ratio, b.value(x) / (x * std::exp(-x)));
  CHECK(ratio < 4.0 * p.eps1);
  CHECK(b.value(400.0) / (400.0 * std::exp(-400.0)) > 3.5 * p.eps1);

  SupersolParams bad = p;
  bad.eps3 *= 1.001;
  CHECK_THROWS_AS(build_Rw(bad), ConfigError);
  CHECK_NOTHROW(build_Rw(bad, false));
}

TEST_CASE("zero bump leaves a zero residual") {
  SupersolParams p = auto_params(local_s1().profile, local_s1().sd, kHR, 1.0, 0.0);
  p.eps1 = p.eps2 = p.eps3 = p.eps4 = 0.0;
  const PiecewiseBump zero(p);
  SupersolParams q = p;
  q.eps4 = 1e-30;  // keeps the plateau search well defined
  const Grid1D g = verification_grid(local_s1().profile, PiecewiseBump(q));
  const Grid1D inner = Grid1D::span(g.x0 + 40.0, g.x_end(), g.dx);
  const auto r = verify(local_s1().profile, zero, kHR, 1.0, 0.0, inner);
  for (const auto& pr : r.pieces) CHECK(std::abs(pr.max_residual) <= 1e-12);
}

TEST_CASE("residual matches a finite-difference evaluation") {
  // an enlarged bump (constraints ignored) makes the residual large enough to compare
  SupersolParams p = auto_params(local_s1().profile, local_s1().sd, kHR, 1.0, 0.0);
  const double scale = 1e12;
  p.eps1 *= scale;
  p.eps2 *= scale;
  p.eps3 *= scale;
  p.eps4 *= scale;
  const auto b = build_Rw(p, false);
  const auto& W = local_s1().profile;
  const double d0 = 1e-3;
  std::vector<VerifySample> samples;
  const Grid1D g = Grid1D::span(p.xi2 - 30.0, W.xi.back(), 0.002);
  verify(W, b, kHR, 1.0, d0, g, &samples);
  const double h = 1e-3;
  int compared = 0;
  for (const auto& smp : samples) {
    if (std::abs(smp.xi - 1.0) > 0.001 && std::abs(smp.xi - 8.0) > 0.001 && std::abs(smp.xi + 1.0) > 0.001) continue;
    auto wbar = [&](double x) { return std::min(W.value(x) - b.value(x), 1.0); };
    const double d1 = (wbar(smp.xi + h) - wbar(smp.xi - h)) / (2.0 * h);
    const double d2 = (wbar(smp.xi + h) - 2.0 * wbar(smp.xi) + wbar(smp.xi - h)) / (h * h);
    const double n0 = d2 + W.c * d1 + kHR.f(wbar(smp.xi), 1.0 + d0);
    CAPTURE(smp.xi);
    CHECK(smp.N0 == doctest::Approx(n0).epsilon(5e-3).scale(1e-6));
    ++compared;
  }
  CHECK(compared == 3);
}

TEST_CASE("HR s=1 certification") {
  const auto& S = local_s1();
  const auto p = auto_params(S.profile, S.sd, kHR, 1.0, 1e-9);
  const auto b = build_Rw(p);
  const Grid1D g = verification_grid(S.profile, b);
  const auto r = verify(S.profile, b, kHR, 1.0, 1e-9, g);
  CHECK(r.pass);
  CHECK(r.failure.empty());
  REQUIRE(r.pieces.size() == 4);
  for (const auto& pr : r.pieces) CHECK(pr.points >= 100);
  REQUIRE(r.corners.size() == 3);
  for (const auto& c : r.corners) CHECK(c.ok);
  CHECK(r.continuity_jump <= 1e-12);
  CHECK(r.plateau_xi < p.xi2 - p.delta3);
  CHECK(S.profile.value(r.plateau_xi) - b.value(r.plateau_xi) == doctest::Approx(1.0).epsilon(1e-12));

  // without the increment every residual is strictly negative
  const auto r0 = verify(S.profile, b, kHR, 1.0, 0.0, g);
  for (const auto& pr : r0.pieces) CHECK(pr.max_residual <= 0.0);

  // monotone degradation
  REQUIRE(r.max_delta0 > 0.0);
  CHECK(verify(S.profile, b, kHR, 1.0, r.max_delta0, g).pass);
  CHECK(verify(S.profile, b, kHR, 1.0, 0.5 * r.max_delta0, g).pass);
  CHECK_FALSE(verify(S.profile, b, kHR, 1.0, 2.0 * r.max_delta0, g).pass);

  // the admissible increment is limited by the amplitude of the middle pieces
  CHECK(r.max_delta0 == doctest::Approx(6.75e-9).epsilon(0.05));
  const auto big = verify(S.profile, b, kHR, 1.0, 1e-4, g);
  CHECK_FALSE(big.pass);
  CHECK(big.failure.find("piece 2") != std::string::npos);

  CHECK_THROWS_AS(verify(S.profile, b, kHR, 1.0, 0.0, Grid1D::span(g.x0, g.x_end(), 0.5)), PreconditionError);
}

TEST_CASE("lambda1 below K2 breaks the construction") {
  const auto& S = local_s1();
  const auto k = estimate_constants(S.profile, kHR, 1.0);
  ParamOverrides ov;
  ov.lambda1 = 0.5 * k.K2;
  ov.allow_invalid = true;
  const auto p = auto_params(S.profile, S.sd, kHR, 1.0, 0.0, ov);
  CHECK_FALSE(p.validated);
  CHECK_THROWS_AS(build_Rw(p), ConfigError);
  const auto b = build_Rw(p, false);
  const auto r = verify(S.profile, b, kHR, 1.0, 0.0, verification_grid(S.profile, b));
  CHECK_FALSE(r.pass);
  // the junction xi2 + delta2 turns convex once delta2 < 1 / lambda1
  CHECK_FALSE(r.corners[1].ok);
  CHECK(r.failure.find("corner at xi = ") != std::string::npos);
  const auto it = std::find_if(r.constraints.begin(), r.constraints.end(),
                               [](const ConstraintCheck& c) { return c.name == "lambda1"; });
  REQUIRE(it != r.constraints.end());
  CHECK_FALSE(it->ok);
}

TEST_CASE("nonlocal certification on the box kernel") {
  const auto& S = box_q1();
  const auto p = auto_params(S.profile, S.sd, kHR, 1.0, 1e-9);
  CHECK(p.mode == WaveMode::Nonlocal);
  CHECK(p.lambda1 == doctest::Approx(std::max(4.0 * p.K2 / p.c, (1.0 + p.K2) / p.c) + 1.0));
  CHECK(all_ok(check_constraints(p)));
  CHECK(p.K4 > 0.0);

  // int J(y) [sigma(x - y) - sigma(x) + y sigma'(x)] e^{lambda0 y} dy = K4 e^{-lambda0 (x - xi1) / 2}
  const auto b = build_Rw(p);
  const auto box = KernelSpec::box(1.0);
  for (double x : {p.xi1 + 0.5, p.xi1 + 3.0, p.xi1 + 10.0}) {
    auto g = [&](double y) {
      return box.density(y) * (b.sigma(x - y) - b.sigma(x) + y * b.sigma_d1(x)) * std::exp(p.lambda0 * y);
    };
    const double lhs = numerics::gauss_legendre(g, -1.0, 1.0, 64);
    CHECK(lhs == doctest::Approx(p.K4 * std::exp(-0.5 * p.lambda0 * (x - p.xi1))).epsilon(1e-10));
  }

  const auto r = verify(S.profile, b, kHR, 1.0, 1e-9, verification_grid(S.profile, b));
  CHECK(r.pass);
  CHECK(r.max_delta0 > 1e-9);
  CHECK(r.max_delta0 < 1e-4);

  ParamOverrides ov;
  ov.lambda1 = 0.5 * p.K2;
  ov.allow_invalid = true;
  const auto q = auto_params(S.profile, S.sd, kHR, 1.0, 0.0, ov);
  const auto bq = build_Rw(q, false);
  CHECK_FALSE(verify(S.profile, bq, kHR, 1.0, 0.0, verification_grid(S.profile, bq)).pass);
}
