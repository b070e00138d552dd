#pragma once

#include <optional>
#include <string>
#include <vector>

#include "frontlab/cauchy.hpp"
#include "frontlab/dispersal.hpp"
#include "frontlab/families.hpp"
#include "frontlab/waves.hpp"

namespace frontlab {

// Bounds along a minimal wave W*: |f''| < K1, |f'| < K2 (5% margin), f' <= -K3
// left of xi2; xi1 is where the quadratic regime W < 1e-2 starts. L0 bounds |df/ds|.
struct SupersolConstants {
  double K1 = 0.0;
  double K2 = 0.0;
  double K3 = 0.0;
  double L0 = 0.0;
  double xi1 = 0.0;
  double xi2 = 0.0;
};

SupersolConstants estimate_constants(const WaveProfile& profile, const FamilySpec& family, double s);

// Parameters of the four-piece correction
//   R = eps1 sigma(xi) e^{-lambda0 xi}       xi >= xi1 + delta1
//       eps2 e^{lambda1 xi}                  xi2 + delta2 <= xi <= xi1 + delta1
//       eps3 sin(delta4 (xi - xi2))          xi2 - delta3 <= xi <= xi2 + delta2
//       -eps4 e^{lambda2 xi}                 xi <= xi2 - delta3
struct SupersolParams {
  WaveMode mode = WaveMode::Local;
  double c = 0.0;  // speed of W*
  double lambda0 = 0.0;
  double L = 0.0;  // kernel half-width (nonlocal)
  double mu = 0.0;  // left-tail rate of 1 - W*
  double xi1 = 0.0, xi2 = 0.0;
  double delta0 = 0.0, delta1 = 0.0, delta2 = 0.0, delta3 = 0.0, delta4 = 0.0;
  double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0, eps4 = 0.0;
  double lambda1 = 0.0, lambda2 = 0.0;
  double K1 = 0.0, K2 = 0.0, K3 = 0.0, K4 = 0.0, L0 = 0.0;
  double A_hat = 0.0;
  bool validated = true;  // false when built through the unvalidated path
};

struct ConstraintCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

std::vector<ConstraintCheck> check_constraints(const SupersolParams& params);

struct ParamOverrides {
  std::optional<double> lambda1;
  // keep going when a constraint cannot be met; the result has validated = false
  bool allow_invalid = false;
};

// Parameter choices of the construction. Throws PreconditionError unless the
// profile is a pulled front (A_hat > 0) and ConfigError when the delta2
// interval is empty.
SupersolParams auto_params(const WaveProfile& profile, const SpectralData& spectral, const FamilySpec& family,
                           double s, double delta0, const ParamOverrides& overrides = {});

class PiecewiseBump {
 public:
  explicit PiecewiseBump(SupersolParams params);

  const SupersolParams& params() const noexcept { return p_; }
  // Junctions xi1 + delta1, xi2 + delta2, xi2 - delta3 (right to left).
  std::vector<double> junctions() const;
  // Piece index 1..4 at x (junction points belong to the piece on their right).
  int piece(double x) const;
  double value(double x) const;
  double value(double x, int piece) const;
  double derivative(double x, int piece) const;
  double second_derivative(double x, int piece) const;
  double sigma(double x) const;
  double sigma_d1(double x) const;
  double sigma_d2(double x) const;

 private:
  SupersolParams p_;
};

// Throws ConfigError on parameters that fail check_constraints.
PiecewiseBump build_Rw(const SupersolParams& params, bool validate = true);

struct PieceResidual {
  int piece = 0;
  double max_residual = 0.0;
  double at = 0.0;
  int points = 0;
  bool ok = false;
};

struct CornerCheck {
  double at = 0.0;
  double dR_right = 0.0;
  double dR_left = 0.0;
  bool ok = false;  // R'(+) >= R'(-), i.e. the super-solution bends down
};

struct VerificationReport {
  std::vector<PieceResidual> pieces;
  std::vector<CornerCheck> corners;
  std::vector<ConstraintCheck> constraints;
  double continuity_jump = 0.0;
  double plateau_xi = 0.0;    // W-bar == 1 for xi <= plateau_xi (= -M)
  double tail_ratio = 0.0;    // max of R / (xi e^{-lambda0 xi}) on the far tail
  double delta0 = 0.0;
  double max_delta0 = 0.0;    // largest passing delta0 (doubling / halving, then bisection); 0 if none
  double tolerance = 1e-9;
  bool pass = false;
  std::string failure;  // first failing check with its location
};

struct VerifySample {
  double xi, W_star, R, W_bar, N0;
};

// Evaluates N0[W-bar] on the grid (W*'' and the convolution of W* are taken
// from the profile equation). Throws PreconditionError when a piece holds
// fewer than 100 grid points.
VerificationReport verify(const WaveProfile& profile, const PiecewiseBump& bump, const FamilySpec& family, double s,
                          double delta0, const Grid1D& grid, std::vector<VerifySample>* samples = nullptr);

// Grid from the plateau to the end of the profile, fine enough for every piece.
Grid1D verification_grid(const WaveProfile& profile, const PiecewiseBump& bump);

// xi where W* - R reaches 1 inside the fourth piece.
double plateau_location(const WaveProfile& profile, const PiecewiseBump& bump);

// K4 = lambda0^-2 int J(y) e^{lambda0 y} (e^{lambda0 y / 2} - 1 - lambda0 y / 2) dy.
double nonlocal_k4(const KernelSpec& kernel, double lambda0);

}  // namespace frontlab
