#pragma once

#include <vector>

#include "frontlab/dispersal.hpp"
#include "frontlab/families.hpp"

namespace frontlab {

// Uniform node-centred grid x_i = x0 + i dx, i = 0..n-1.
struct Grid1D {
  double x0 = 0.0;
  double dx = 0.1;
  int n = 16;

  Grid1D() = default;
  Grid1D(double x0, double dx, int n);
  // Grid covering [a, b] with spacing as close to dx as an integer count allows.
  static Grid1D span(double a, double b, double dx);

  double x(int i) const noexcept { return x0 + i * dx; }
  double x_end() const noexcept { return x(n - 1); }
};

struct Field {
  Grid1D grid;
  std::vector<double> values;
};

// Smooth indicator of [a, b]: 1 inside, cosine ramps of width `width` outside.
Field mollified_indicator(const Grid1D& grid, double a = 0.0, double b = 10.0, double width = 1.0);
Field constant_field(const Grid1D& grid, double value);

struct FrontTrack {
  std::vector<double> times;
  std::vector<double> positions;
  double level = 0.5;
  int backward_steps = 0;  // samples where the front moved left by more than dx
};

struct SpeedEstimate {
  double c_hat = 0.0;
  double std_error = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int samples = 0;
};

enum class RightBoundary { Dirichlet, Neumann };

struct EvolveOptions {
  double sample_interval = 1.0;
  RightBoundary right = RightBoundary::Dirichlet;
  // Abort when the tracked front comes within max(5L, 20dx) of the right end.
  bool guard_right_boundary = true;
};

struct EvolveResult {
  Field field;
  FrontTrack track;
  int steps = 0;
  double dt_used = 0.0;
};

// Explicit Euler for w_t = w_xx + f(w;s) (Local) or w_t = J*w - w + f(w;s),
// Neumann on the left. Throws ConfigError on CFL / resolution violations and
// InstabilityError if the field leaves [-0.01, 1.01].
EvolveResult evolve(const FamilySpec& family, double s, const KernelSpec& kernel, const Field& init,
                    double T, double dt, double level = 0.5, const EvolveOptions& opts = {});

// Largest admissible time step for the given setup.
double max_stable_dt(const FamilySpec& family, double s, const KernelSpec& kernel, double dx);

// Rightmost level crossing, linearly interpolated. Throws FrontAbsent.
double front_position(const Field& field, double level);

// Least-squares slope of the track over samples with t in [t_lo, t_hi].
SpeedEstimate estimate_speed(const FrontTrack& track, double t_lo, double t_hi);

// Discrete convolution weights J(k dx) dx with trapezoid end weights,
// normalized to unit mass; index k + m for k = -m..m.
std::vector<double> convolution_weights(const KernelSpec& kernel, double dx);

}  // namespace frontlab
