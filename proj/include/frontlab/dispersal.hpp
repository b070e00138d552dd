#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace frontlab {

enum class KernelKind { Local, Box, Triangle, CosineBump, Tabulated };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

// Dispersal operator: the Laplacian (Local) or a compactly supported,
// symmetric probability density J on [-L, L].
class KernelSpec {
 public:
  static KernelSpec local();
  static KernelSpec box(double L);
  static KernelSpec triangle(double L);
  static KernelSpec cosine_bump(double L);
  // Samples (x, J(x)) with strictly increasing x; piecewise-linear in between
  // and zero outside. Mass within 1% of one is renormalized, otherwise the
  // table is rejected with ConfigError.
  static KernelSpec tabulated(std::vector<std::pair<double, double>> samples);
  // Two-column plain text file: x J(x) per line, '#' starts a comment.
  static KernelSpec load_tabulated(const std::filesystem::path& path);

  KernelKind kind() const noexcept { return kind_; }
  bool is_local() const noexcept { return kind_ == KernelKind::Local; }
  double L() const noexcept { return L_; }
  const std::vector<std::pair<double, double>>& samples() const noexcept { return samples_; }

  // J(x); zero for |x| > L. Throws UnsupportedOperation for Local.
  double density(double x) const;
  // Abscissae where J may lose smoothness (support ends, apex, table nodes).
  std::vector<double> breakpoints() const;

 private:
  KernelSpec(KernelKind kind, double L) : kind_(kind), L_(L) {}

  KernelKind kind_;
  double L_ = 0.0;
  std::vector<std::pair<double, double>> samples_;
};

// M(lambda) = int J(x) e^{lambda x} dx. Local kernels throw UnsupportedOperation.
double mgf(const KernelSpec& kernel, double lam);
// int x^order J(x) e^{lambda x} dx for order 0, 1, 2.
double mgf_moment(const KernelSpec& kernel, double lam, int order);
// h(lambda) = lambda^2 + gamma0 (Local) or M(lambda) - 1 + gamma0.
double h_value(const KernelSpec& kernel, double gamma0, double lam);
// Search ceiling 50/L for nonlocal kernels.
double lambda_max(const KernelSpec& kernel);

struct SpectralData {
  double c0_star = 0.0;
  double lambda0 = 0.0;
  double gamma0 = 0.0;
  bool local = true;
  double minimizer_tol = 0.0;         // golden-section bracket width before polishing
  int newton_iterations = 0;
  double stationarity_residual = 0.0;  // |M'(lambda0) - c0_star|, nonlocal only
};

// Linearly selected speed c0* = min_{lambda>0} h(lambda)/lambda and its minimizer.
SpectralData linear_speed(const KernelSpec& kernel, double gamma0);

// Positive roots lambda_-(c) <= lambda_+(c) of h(lambda) = c lambda.
std::pair<double, double> lambda_roots(const KernelSpec& kernel, double gamma0, double c);

// Rate mu > 0 with 1 - W ~ e^{mu xi} as xi -> -infinity, for f'(1) = f1 < 0:
// mu^2 + c mu + f1 = 0 (Local) or M(mu) - 1 + c mu + f1 = 0.
double mu_root(const KernelSpec& kernel, double f1, double c);

}  // namespace frontlab
