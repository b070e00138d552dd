#pragma once

#include <optional>
#include <string>
#include <vector>

#include "frontlab/dispersal.hpp"
#include "frontlab/families.hpp"

namespace frontlab {

enum class WaveMode { Local, Nonlocal };
std::string to_string(WaveMode mode);

// Discretized monotone front of W'' + cW' + f(W;s) = 0 (Local) or
// J*W - W + cW' + f(W;s) = 0 (Nonlocal) on a uniform xi-grid, translated so
// that W(pin_xi) = 1/2.
struct WaveProfile {
  double c = 0.0;
  double s = 0.0;
  WaveMode mode = WaveMode::Local;
  std::vector<double> xi;
  std::vector<double> W;
  std::vector<double> dW;  // W'
  double residual = 0.0;   // sup-norm residual of the profile equation
  double tolerance = 0.0;
  int iterations = 0;      // integrator steps (Local) or Newton iterations
  FamilySpec family = FamilySpec::hadeler_rothe();
  KernelSpec kernel = KernelSpec::local();

  double dx() const noexcept { return xi.size() > 1 ? xi[1] - xi[0] : 0.0; }
  // Cubic Hermite interpolation from (W, W'); exponential tails outside the grid.
  double value(double x) const;
  double derivative(double x) const;
  // 1 - W(x), accurate where W is close to 1.
  double gap(double x) const;
};

struct WaveOutcome {
  std::optional<WaveProfile> profile;
  std::string reason;  // why no admissible profile exists; empty on success
  explicit operator bool() const noexcept { return profile.has_value(); }
};

struct ShootingOptions {
  double offset = 1e-8;  // distance from (1, 0) along the unstable eigenvector
  double rtol = 1e-12;
  double atol = 1e-22;
  double h_out = 0.01;
  double w_end = 1e-9;
  long max_steps = 2'000'000;
  double residual_tol = 1e-8;
  double pin_xi = 0.0;
  // relative tolerance on the sign test of the slow tail mode at W = w_end
  double mode_slack = 1e-5;
};

// Phase-plane shooting from the unstable manifold of (1, 0). Throws
// PreconditionError for c < 2 sqrt(gamma0) and InconclusiveError when the
// step cap is hit.
WaveOutcome solve_wave_local(const FamilySpec& family, double s, double c, const ShootingOptions& opts = {});

// Bisection on shooting admissibility over [2 sqrt(gamma0), c_upper].
double minimal_speed_local(const FamilySpec& family, double s, double tol = 1e-8,
                           const ShootingOptions& opts = {});

struct NewtonOptions {
  int cells_per_support = 32;  // dx = L / cells_per_support
  double tail_span = 40.0;     // domain [-tail_span/mu, tail_span/lambda_-(c)]
  double newton_tol = 1e-11;
  double residual_tol = 1e-7;
  int max_iterations = 200;
  double pin_xi = 0.0;
  // tail sign test: local decay rate at W = mode_level must not exceed lambda_+ (1 + mode_slack)
  double mode_level = 1e-10;
  double mode_slack = 1e-4;
  const WaveProfile* initial_guess = nullptr;
};

// Damped bordered Newton for the nonlocal profile. Throws PreconditionError
// on an under-resolved kernel or c < c0*, NonconvergenceError on stagnation
// and InadmissibleProfile when the converged profile is not monotone/positive.
WaveProfile solve_wave_nonlocal(const FamilySpec& family, double q, double c, const KernelSpec& kernel,
                                const NewtonOptions& opts = {});

struct MinimalWave {
  double c = 0.0;
  WaveProfile profile;
};

// Minimal speed together with the profile the search accepted at that speed.
MinimalWave minimal_wave_nonlocal(const FamilySpec& family, double q, const KernelSpec& kernel, double tol = 1e-9,
                                  const NewtonOptions& opts = {});
// Bisection on Newton admissibility over [c0*, c_upper]; returns the admissible end.
double minimal_speed_nonlocal(const FamilySpec& family, double q, const KernelSpec& kernel,
                              double tol = 1e-9, const NewtonOptions& opts = {});

// Dispatches on the kernel kind.
double minimal_speed(const FamilySpec& family, double s, const KernelSpec& kernel, double tol);
WaveProfile solve_wave(const FamilySpec& family, double s, double c, const KernelSpec& kernel);
MinimalWave minimal_wave(const FamilySpec& family, double s, const KernelSpec& kernel, double tol);

// Independent sup-norm residual of the profile equation, skipping boundary stencils.
double profile_residual(const WaveProfile& profile);

struct DecayFit {
  double lambda_hat = 0.0;
  double A_hat = 0.0;
  double B_hat = 0.0;
  double A_stderr = 0.0;
  double residual = 0.0;  // rms relative misfit
  double xi_lo = 0.0;
  double xi_hi = 0.0;
  int samples = 0;
};

enum class FrontKind { Pulled, Transition, Pushed, Supercritical };
std::string to_string(FrontKind kind);
FrontKind front_kind_from_string(const std::string& name);

struct FrontClass {
  FrontKind kind = FrontKind::Pulled;
  double lambda0 = 0.0;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  double a_ratio = 0.0;  // |A| xi_end / |B|
  std::string evidence;
};

struct DecayResult {
  DecayFit fit;
  FrontClass front;
};

// Fit W ~ (A xi + B) e^{-lambda xi} on the tail window 1e-9 <= W <= 1e-2 and
// classify. Throws PreconditionError on a short tail, Unclassified when the
// rate matches no candidate.
DecayResult fit_decay(const WaveProfile& profile, const SpectralData& spectral, double c);
DecayResult fit_decay(const WaveProfile& profile, const SpectralData& spectral);
// Fit only, no classification.
DecayFit fit_tail(const WaveProfile& profile);

struct LeftTailFit {
  double mu_hat = 0.0;
  double xi_lo = 0.0;
  double xi_hi = 0.0;
  double residual = 0.0;
  int samples = 0;
};

// Rate of 1 - W as xi -> -infinity on the window 1e-8 <= 1 - W <= 1e-3.
LeftTailFit fit_left_tail(const WaveProfile& profile);

}  // namespace frontlab
