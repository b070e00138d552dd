#include "frontlab/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "frontlab/errors.hpp"
#include "frontlab/numerics.hpp"

namespace frontlab {

namespace {

constexpr double kLow = -0.01;
constexpr double kHigh = 1.01;

int support_cells(const KernelSpec& kernel, double dx) {
  const double r = kernel.L() / dx;
  const double nearest = std::round(r);
  return static_cast<int>(std::abs(r - nearest) < 1e-9 * std::max(1.0, r) ? nearest : std::floor(r));
}

}  // namespace

Grid1D::Grid1D(double x0_, double dx_, int n_) : x0(x0_), dx(dx_), n(n_) {
  if (!(dx > 0.0) || !std::isfinite(dx)) throw ConfigError("grid spacing dx must be positive");
  if (n < 16) throw ConfigError("grid needs at least 16 points");
}

Grid1D Grid1D::span(double a, double b, double dx) {
  if (!(b > a)) throw ConfigError("grid interval must satisfy a < b");
  if (!(dx > 0.0)) throw ConfigError("grid spacing dx must be positive");
  const int cells = std::max(15, static_cast<int>(std::lround((b - a) / dx)));
  return Grid1D(a, (b - a) / cells, cells + 1);
}

Field mollified_indicator(const Grid1D& grid, double a, double b, double width) {
  Field f{grid, std::vector<double>(static_cast<std::size_t>(grid.n))};
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    double v = 1.0;
    const double d = x < a ? a - x : (x > b ? x - b : 0.0);
    if (d > 0.0) v = d >= width ? 0.0 : 0.5 * (1.0 + std::cos(std::numbers::pi * d / width));
    f.values[static_cast<std::size_t>(i)] = v;
  }
  return f;
}

Field constant_field(const Grid1D& grid, double value) {
  return Field{grid, std::vector<double>(static_cast<std::size_t>(grid.n), value)};
}

std::vector<double> convolution_weights(const KernelSpec& kernel, double dx) {
  if (kernel.is_local()) throw UnsupportedOperation("convolution_weights: Local kernel");
  const int m = support_cells(kernel, dx);
  if (m < 8) {
    std::ostringstream os;
    os << "kernel support L = " << kernel.L() << " spans " << m << " cells of dx = " << dx
       << "; at least 8 are required";
    throw ConfigError(os.str());
  }
  const bool edge_on_node = std::abs(m * dx - kernel.L()) <= 1e-9 * kernel.L();
  std::vector<double> w(static_cast<std::size_t>(2 * m + 1));
  double mass = 0.0;
  for (int k = -m; k <= m; ++k) {
    double v = kernel.density(k * dx) * dx;
    if (edge_on_node && std::abs(k) == m) v *= 0.5;
    w[static_cast<std::size_t>(k + m)] = v;
    mass += v;
  }
  for (auto& v : w) v /= mass;
  return w;
}

double max_stable_dt(const FamilySpec& family, double s, const KernelSpec& kernel, double dx) {
  if (kernel.is_local()) return 0.4 * dx * dx;
  return 0.4 / (1.0 + family.gamma0() + family.max_abs_df(s));
}

double front_position(const Field& field, double level) {
  const auto& v = field.values;
  for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
    const double a = v[static_cast<std::size_t>(i - 1)], b = v[static_cast<std::size_t>(i)];
    if ((a >= level) != (b >= level)) {
      const double t = (a - level) / (a - b);
      return field.grid.x(i - 1) + t * field.grid.dx;
    }
  }
  throw FrontAbsent("front_position: field never crosses level " + std::to_string(level));
}

SpeedEstimate estimate_speed(const FrontTrack& track, double t_lo, double t_hi) {
  std::vector<double> t, x;
  for (std::size_t i = 0; i < track.times.size(); ++i) {
    if (track.times[i] >= t_lo - 1e-9 && track.times[i] <= t_hi + 1e-9) {
      t.push_back(track.times[i]);
      x.push_back(track.positions[i]);
    }
  }
  if (t.size() < 10) {
    std::ostringstream os;
    os << "estimate_speed: " << t.size() << " samples in window [" << t_lo << ", " << t_hi
       << "], need at least 10";
    throw WindowError(os.str());
  }
  const auto fit = numerics::linear_regression(t, x);
  return SpeedEstimate{fit.slope, fit.slope_stderr, t.front(), t.back(), static_cast<int>(t.size())};
}

EvolveResult evolve(const FamilySpec& family, double s, const KernelSpec& kernel, const Field& init,
                    double T, double dt, double level, const EvolveOptions& opts) {
  const Grid1D& g = init.grid;
  if (static_cast<int>(init.values.size()) != g.n) throw ConfigError("field size does not match its grid");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("tracking level must lie in (0, 1)");
  if (!(T >= 0.0) || !(dt > 0.0)) throw ConfigError("evolve: need T >= 0 and dt > 0");
  if (!(opts.sample_interval > 0.0)) throw ConfigError("evolve: sample interval must be positive");
  for (double v : init.values)
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("initial datum must take values in [0, 1]");
  const double dt_max = max_stable_dt(family, s, kernel, g.dx);
  if (dt > dt_max * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "CFL violation: dt = " << dt << " exceeds " << dt_max
       << (kernel.is_local() ? " (0.4 dx^2)" : " (0.4/(1+gamma0+max|f'|))");
    throw ConfigError(os.str());
  }

  const bool local = kernel.is_local();
  std::vector<double> weights;
  int m = 1;
  if (!local) {
    weights = convolution_weights(kernel, g.dx);
    m = static_cast<int>(weights.size() / 2);
  }
  const double margin = std::max(local ? 0.0 : 5.0 * kernel.L(), 20.0 * g.dx);
  const bool neumann_right = opts.right == RightBoundary::Neumann;

  const int n = g.n;
  const int nsteps = T > 0.0 ? static_cast<int>(std::ceil(T / dt - 1e-9)) : 0;
  const double h = nsteps > 0 ? T / nsteps : dt;
  const int per_sample = std::max(1, static_cast<int>(std::lround(opts.sample_interval / h)));

  // padded buffer: m ghost nodes on each side
  std::vector<double> u(static_cast<std::size_t>(n + 2 * m)), next(static_cast<std::size_t>(n));
  std::copy(init.values.begin(), init.values.end(), u.begin() + m);
  auto fill_ghosts = [&] {
    for (int k = 1; k <= m; ++k) {
      u[static_cast<std::size_t>(m - k)] = u[static_cast<std::size_t>(m + std::min(k, n - 1))];
      u[static_cast<std::size_t>(m + n - 1 + k)] =
          neumann_right ? u[static_cast<std::size_t>(m + std::max(n - 1 - k, 0))] : 0.0;
    }
  };

  EvolveResult out;
  out.track.level = level;
  out.dt_used = h;
  Field current{g, init.values};
  auto record = [&](double t) {
    double x;
    try {
      x = front_position(current, level);
    } catch (const FrontAbsent&) {
      return;
    }
    auto& tr = out.track;
    if (!tr.positions.empty() && x < tr.positions.back() - g.dx) ++tr.backward_steps;
    tr.times.push_back(t);
    tr.positions.push_back(x);
    if (opts.guard_right_boundary && !neumann_right && x > g.x_end() - margin) {
      std::ostringstream os;
      os << "front reached x = " << x << " at t = " << t << ", within " << margin
         << " of the right boundary; enlarge the domain";
      throw ConfigError(os.str());
    }
  };
  record(0.0);

  const double inv_dx2 = 1.0 / (g.dx * g.dx);
  for (int step = 1; step <= nsteps; ++step) {
    fill_ghosts();
    for (int i = 0; i < n; ++i) {
      const double* p = u.data() + m + i;
      double disp;
      if (local) {
        disp = (p[-1] - 2.0 * p[0] + p[1]) * inv_dx2;
      } else {
        double conv = 0.0;
        for (int k = -m; k <= m; ++k) conv += weights[static_cast<std::size_t>(k + m)] * p[k];
        disp = conv - p[0];
      }
      next[static_cast<std::size_t>(i)] = p[0] + h * (disp + family.f(p[0], s));
    }
    for (int i = 0; i < n; ++i) {
      const double v = next[static_cast<std::size_t>(i)];
      if (!(v >= kLow && v <= kHigh)) {
        std::ostringstream os;
        os << "field left [-0.01, 1.01] (value " << v << " at x = " << g.x(i) << ", t = " << step * h
           << ")";
        throw InstabilityError(os.str(), step * h);
      }
      u[static_cast<std::size_t>(m + i)] = v;
    }
    if (step % per_sample == 0 || step == nsteps) {
      std::copy(u.begin() + m, u.begin() + m + n, current.values.begin());
      record(step * h);
    }
  }
  std::copy(u.begin() + m, u.begin() + m + n, current.values.begin());
  out.field = std::move(current);
  out.steps = nsteps;
  return out;
}

}  // namespace frontlab
