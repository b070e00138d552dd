#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "frontlab/cauchy.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/selection.hpp"
#include "frontlab/supersol.hpp"

namespace py = pybind11;
using namespace frontlab;

PYBIND11_MODULE(_frontlab, m) {
  m.doc() = "Front speed selection: spreading speeds, traveling waves, thresholds and super-solution checks.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<AssumptionViolation>(m, "AssumptionViolation", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<Unclassified>(m, "Unclassified", base.ptr());
  auto nc = py::register_exception<NonconvergenceError>(m, "NonconvergenceError", base.ptr());
  py::register_exception<InadmissibleProfile>(m, "InadmissibleProfile", nc.ptr());

  py::class_<FamilySpec>(m, "FamilySpec")
      .def_static(
          "hadeler_rothe", [](double lo, double hi) { return FamilySpec::hadeler_rothe({lo, hi}); }, py::arg("s_lo") = 0.0,
          py::arg("s_hi") = std::numeric_limits<double>::infinity())
      .def_static(
          "poly_affine",
          [](const FamilySpec::Coefficients& c, double g0, double lo, double hi) {
            return FamilySpec::poly_affine(c, g0, {lo, hi});
          },
          py::arg("coefficients"), py::arg("gamma0"), py::arg("s_lo") = 0.0,
          py::arg("s_hi") = std::numeric_limits<double>::infinity())
      .def_property_readonly("kind", [](const FamilySpec& f) { return to_string(f.kind()); })
      .def_property_readonly("gamma0", &FamilySpec::gamma0)
      .def("f", &FamilySpec::f, py::arg("w"), py::arg("s"))
      .def("df", &FamilySpec::df, py::arg("w"), py::arg("s"))
      .def("d2f", &FamilySpec::d2f, py::arg("w"), py::arg("s"));

  m.def("kpp_holds", &kpp_holds, py::arg("family"), py::arg("s"), py::arg("n_grid") = 1000);

  py::class_<KernelSpec>(m, "KernelSpec")
      .def_static("local", &KernelSpec::local)
      .def_static("box", &KernelSpec::box, py::arg("L"))
      .def_static("triangle", &KernelSpec::triangle, py::arg("L"))
      .def_static("cosine_bump", &KernelSpec::cosine_bump, py::arg("L"))
      .def_static("tabulated", &KernelSpec::tabulated, py::arg("samples"))
      .def_property_readonly("kind", [](const KernelSpec& k) { return to_string(k.kind()); })
      .def_property_readonly("L", &KernelSpec::L)
      .def("density", &KernelSpec::density, py::arg("x"));

  py::class_<SpectralData>(m, "SpectralData")
      .def_readonly("c0_star", &SpectralData::c0_star)
      .def_readonly("lambda0", &SpectralData::lambda0)
      .def_readonly("gamma0", &SpectralData::gamma0);

  m.def("linear_speed", &linear_speed, py::arg("kernel"), py::arg("gamma0"));
  m.def("lambda_roots", &lambda_roots, py::arg("kernel"), py::arg("gamma0"), py::arg("c"));
  m.def("mu_root", &mu_root, py::arg("kernel"), py::arg("f1"), py::arg("c"));
  m.def("mgf", &mgf, py::arg("kernel"), py::arg("lam"));

  py::class_<WaveProfile>(m, "WaveProfile")
      .def_readonly("c", &WaveProfile::c)
      .def_readonly("s", &WaveProfile::s)
      .def_readonly("xi", &WaveProfile::xi)
      .def_readonly("W", &WaveProfile::W)
      .def_readonly("residual", &WaveProfile::residual)
      .def_property_readonly("mode", [](const WaveProfile& p) { return to_string(p.mode); })
      .def("value", &WaveProfile::value, py::arg("x"));

  m.def("minimal_speed", &minimal_speed, py::arg("family"), py::arg("s"), py::arg("kernel"), py::arg("tol") = 1e-8);
  m.def("solve_wave", &solve_wave, py::arg("family"), py::arg("s"), py::arg("c"), py::arg("kernel"));
  m.def(
      "minimal_wave",
      [](const FamilySpec& f, double s, const KernelSpec& k, double tol) { return minimal_wave(f, s, k, tol).profile; },
      py::arg("family"), py::arg("s"), py::arg("kernel"), py::arg("tol") = 0.0,
      "Minimal traveling wave; tol = 0 picks 1e-8 (local) or 1e-9 (nonlocal).");

  py::class_<DecayFit>(m, "DecayFit")
      .def_readonly("lambda_hat", &DecayFit::lambda_hat)
      .def_readonly("A_hat", &DecayFit::A_hat)
      .def_readonly("B_hat", &DecayFit::B_hat)
      .def_readonly("residual", &DecayFit::residual);

  m.def(
      "classify",
      [](const WaveProfile& p, const SpectralData& sd) {
        const DecayResult d = fit_decay(p, sd);
        return py::make_tuple(to_string(d.front.kind), d.fit, d.front.evidence);
      },
      py::arg("profile"), py::arg("spectral"), "Tail fit and front class: (class, DecayFit, evidence).");

  py::class_<CurvePoint>(m, "CurvePoint")
      .def_readonly("s", &CurvePoint::s)
      .def_readonly("c_star", &CurvePoint::c_star)
      .def_readonly("fit", &CurvePoint::fit)
      .def_readonly("evidence", &CurvePoint::evidence)
      .def_property_readonly("kind", &class_label);

  m.def(
      "speed_curve",
      [](const FamilySpec& f, const KernelSpec& k, const std::vector<double>& s_list, int threads) {
        SelectionOptions o;
        o.threads = threads;
        py::gil_scoped_release release;
        return speed_curve(f, k, s_list, o);
      },
      py::arg("family"), py::arg("kernel"), py::arg("s_list"), py::arg("threads") = 1);

  py::class_<ThresholdResult>(m, "ThresholdResult")
      .def_readonly("s_star", &ThresholdResult::s_star)
      .def_readonly("s_lo", &ThresholdResult::s_lo)
      .def_readonly("s_hi", &ThresholdResult::s_hi)
      .def_readonly("c_lin", &ThresholdResult::c_lin)
      .def_readonly("transition", &ThresholdResult::transition);

  m.def(
      "find_threshold",
      [](const FamilySpec& f, const KernelSpec& k, double lo, double hi, double tol_s, double eps_c, int threads) {
        SelectionOptions o;
        o.threads = threads;
        py::gil_scoped_release release;
        return find_threshold(f, k, lo, hi, tol_s, eps_c, o);
      },
      py::arg("family"), py::arg("kernel"), py::arg("s_lo"), py::arg("s_hi"), py::arg("tol_s") = 0.02,
      py::arg("eps_c") = 1e-6, py::arg("threads") = 1);

  m.def(
      "transition_certificate",
      [](const ThresholdResult& r) {
        const CertificateReport c = transition_certificate(r);
        py::list probes;
        for (const auto& p : c.probes)
          probes.append(py::dict(py::arg("role") = p.role, py::arg("s") = p.s, py::arg("kind") = class_label(p.point),
                                 py::arg("expected") = p.expected, py::arg("ok") = p.ok));
        return py::dict(py::arg("pass") = c.pass, py::arg("probes") = probes, py::arg("notes") = c.notes);
      },
      py::arg("result"));

  m.def(
      "estimate_spreading_speed",
      [](const FamilySpec& f, double s, const KernelSpec& k, double x_max, double dx, double T, double dt, double t_lo) {
        const Grid1D g = Grid1D::span(0.0, x_max, dx);
        if (dt <= 0.0) dt = std::min(0.01, 0.9 * max_stable_dt(f, s, k, g.dx));
        EvolveResult run;
        {
          py::gil_scoped_release release;
          run = evolve(f, s, k, mollified_indicator(g), T, dt);
        }
        const SpeedEstimate e = estimate_speed(run.track, t_lo, T);
        return py::make_tuple(e.c_hat, e.std_error);
      },
      py::arg("family"), py::arg("s"), py::arg("kernel"), py::arg("x_max") = 600.0, py::arg("dx") = 0.1,
      py::arg("T") = 200.0, py::arg("dt") = 0.0, py::arg("t_lo") = 120.0,
      "Explicit-Euler Cauchy run from a mollified step; returns (c_hat, stderr).");

  m.def(
      "certify_supersolution",
      [](const FamilySpec& f, double s, const KernelSpec& k, double delta0, py::object lambda1) {
        const MinimalWave mw = minimal_wave(f, s, k, k.is_local() ? 1e-8 : 1e-9);
        ParamOverrides ov;
        if (!lambda1.is_none()) {
          ov.lambda1 = lambda1.cast<double>();
          ov.allow_invalid = true;
        }
        const SupersolParams p = auto_params(mw.profile, linear_speed(k, f.gamma0()), f, s, delta0, ov);
        const PiecewiseBump b = build_Rw(p, !ov.allow_invalid);
        const VerificationReport r = verify(mw.profile, b, f, s, delta0, verification_grid(mw.profile, b));
        py::list pieces;
        for (const auto& pr : r.pieces) pieces.append(py::make_tuple(pr.piece, pr.max_residual, pr.ok));
        py::list corners;
        for (const auto& c : r.corners) corners.append(py::make_tuple(c.at, c.ok));
        return py::dict(py::arg("pass") = r.pass, py::arg("failure") = r.failure, py::arg("max_delta0") = r.max_delta0,
                        py::arg("pieces") = pieces, py::arg("corners") = corners,
                        py::arg("plateau_xi") = r.plateau_xi, py::arg("K2") = p.K2, py::arg("lambda1") = p.lambda1);
      },
      py::arg("family"), py::arg("s"), py::arg("kernel"), py::arg("delta0"), py::arg("lambda1") = py::none());
}
