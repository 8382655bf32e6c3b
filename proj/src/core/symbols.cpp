#include "symbols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace obslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kZeroSetTol = 1e-9;   // membership: |p| <= tol * max|p|
constexpr double kSurfaceTol = 1e-7;

double surface_residual(ScalingTag scaling, const DualPoint& pt) {
  if (scaling == ScalingTag::Classical)
    return std::abs(pt.tau * pt.tau + pt.xi * pt.xi - 1.0);
  return std::abs(pt.tau * pt.tau + 0.5 * pt.xi * pt.xi - 1.0);
}

}  // namespace

DualPoint hypersurface_point(ScalingTag scaling, double phi) {
  if (scaling == ScalingTag::Classical) return {std::cos(phi), std::sin(phi)};
  return {std::cos(phi), std::sqrt(2.0) * std::sin(phi)};
}

cplx eval_classical(const PrincipalSymbol& p, double x, const DualPoint& pt) {
  if (surface_residual(ScalingTag::Classical, pt) > kSurfaceTol)
    throw_validation("InvalidArgument", "dual point is not on the unit sphere");
  switch (p.kind) {
    case EvolutionKind::Wave:
      return cplx(pt.tau * pt.tau - p.coeff_at(x) * pt.xi * pt.xi, 0.0);
    case EvolutionKind::Heat:
    case EvolutionKind::Schrodinger:
      return cplx(p.coeff_at(x) * pt.xi * pt.xi, 0.0);
    case EvolutionKind::EvolutionK:
      if (p.order == 1) return cplx(p.coeff_at(x) * pt.xi * pt.xi, 0.0);
      if (p.order == 2)
        return cplx(pt.tau * pt.tau - p.coeff_at(x) * pt.xi * pt.xi, 0.0);
      return cplx(std::pow(pt.tau, p.order), 0.0);
  }
  return cplx(0.0, 0.0);
}

cplx eval_parabolic(const PrincipalSymbol& p, double x, const DualPoint& pt) {
  if (surface_residual(ScalingTag::Parabolic, pt) > kSurfaceTol)
    throw_validation("InvalidArgument", "dual point is not on the ellipsoid P");
  const double quad = 4.0 * std::numbers::pi * std::numbers::pi * pt.xi * pt.xi;
  switch (p.kind) {
    case EvolutionKind::Schrodinger:
      return cplx(kTwoPi * pt.tau + p.coeff_at(x) * quad, 0.0);
    case EvolutionKind::Heat:
      return cplx(p.coeff_at(x) * quad, kTwoPi * pt.tau);
    case EvolutionKind::EvolutionK:
      if (p.order == 1) return cplx(p.coeff_at(x) * quad, kTwoPi * pt.tau);
      return std::pow(cplx(0.0, kTwoPi * pt.tau), p.order);
    case EvolutionKind::Wave:
      return std::pow(cplx(0.0, kTwoPi * pt.tau), 2);
  }
  return cplx(0.0, 0.0);
}

cplx eval_symbol(const PrincipalSymbol& p, double x, const DualPoint& pt, ScalingTag scaling) {
  return scaling == ScalingTag::Classical ? eval_classical(p, x, pt)
                                          : eval_parabolic(p, x, pt);
}

DualPoint parabolic_project(const DualPoint& pt) {
  if (pt.tau == 0.0 && pt.xi == 0.0)
    throw_validation("OriginProjection", "cannot project the dual-space origin");
  if (pt.xi == 0.0) return {pt.tau > 0.0 ? 1.0 : -1.0, 0.0};
  const double a = pt.tau / (pt.xi * pt.xi);
  // xi_P^2 solves a^2 X^2 + X/2 - 1 = 0; written cancellation-free
  const double xi2 = 2.0 / (0.5 + std::sqrt(0.25 + 4.0 * a * a));
  const double xi_p = (pt.xi > 0.0 ? 1.0 : -1.0) * std::sqrt(xi2);
  return {a * xi2, xi_p};
}

double parabolic_gauge(const DualPoint& pt) {
  const double t2 = kTwoPi * pt.tau * kTwoPi * pt.tau;
  const double x2 = kTwoPi * pt.xi * kTwoPi * pt.xi;
  return std::pow(t2 + x2 * x2, 0.25);
}

namespace {

double abs_symbol(const PrincipalSymbol& p, double x, double phi, ScalingTag scaling) {
  return std::abs(eval_symbol(p, x, hypersurface_point(scaling, phi), scaling));
}

/// Ternary search for the minimizer of |p(x, phi)| on [lo, hi].
double refine_minimum(const PrincipalSymbol& p, double x, double lo, double hi,
                      ScalingTag scaling) {
  for (int it = 0; it < 80; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (abs_symbol(p, x, m1, scaling) <= abs_symbol(p, x, m2, scaling))
      hi = m2;
    else
      lo = m1;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<CharPoint> sample_characteristic_set(const PrincipalSymbol& p, double a, double b,
                                                 ScalingTag scaling, int n_angle, int n_x,
                                                 double* max_abs_out) {
  if (n_angle < 360) throw_validation("InvalidArgument", "need n_angle >= 360");
  if (n_x < 1) throw_validation("InvalidArgument", "need n_x >= 1");

  std::vector<double> xs(n_x);
  for (int i = 0; i < n_x; ++i)
    xs[i] = (n_x == 1) ? 0.5 * (a + b) : a + (b - a) * i / (n_x - 1);

  const double dphi = kTwoPi / n_angle;

  double max_abs = 0.0;
  std::vector<std::vector<double>> grid(n_x, std::vector<double>(n_angle));
  for (int i = 0; i < n_x; ++i)
    for (int k = 0; k < n_angle; ++k) {
      grid[i][k] = abs_symbol(p, xs[i], k * dphi, scaling);
      max_abs = std::max(max_abs, grid[i][k]);
    }
  if (max_abs_out) *max_abs_out = max_abs;

  std::vector<CharPoint> zeros;
  if (max_abs == 0.0) return zeros;
  const double thresh = kZeroSetTol * max_abs;

  for (int i = 0; i < n_x; ++i) {
    for (int k = 0; k < n_angle; ++k) {
      const double prev = grid[i][(k + n_angle - 1) % n_angle];
      const double next = grid[i][(k + 1) % n_angle];
      if (grid[i][k] > prev || grid[i][k] > next) continue;  // not a local minimum
      const double phi =
          refine_minimum(p, xs[i], (k - 1) * dphi, (k + 1) * dphi, scaling);
      if (abs_symbol(p, xs[i], phi, scaling) <= thresh)
        zeros.push_back({xs[i], hypersurface_point(scaling, phi)});
    }
  }
  return zeros;
}

SeparationReport separation_margin(const PrincipalSymbol& p1, const PrincipalSymbol& p2,
                                   double a, double b, ScalingTag scaling,
                                   int n_angle, int n_x) {
  if (n_x < 100) n_x = 100;
  SeparationReport rep;
  rep.scaling = scaling;

  std::vector<CharPoint> z1 =
      sample_characteristic_set(p1, a, b, scaling, n_angle, n_x, &rep.max_abs1);
  std::vector<CharPoint> z2 =
      sample_characteristic_set(p2, a, b, scaling, n_angle, n_x, &rep.max_abs2);
  rep.empty1 = z1.empty();
  rep.empty2 = z2.empty();

  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<CharPoint>& zeros, const PrincipalSymbol& other,
                      double other_max) {
    if (other_max <= 0.0) return;
    for (const CharPoint& z : zeros) {
      const double v = std::abs(eval_symbol(other, z.x, z.pt, scaling)) / other_max;
      if (v < best) {
        best = v;
        rep.x_witness = z.x;
        rep.pt_witness = z.pt;
      }
    }
  };
  consider(z1, p2, rep.max_abs2);
  consider(z2, p1, rep.max_abs1);

  if (!std::isfinite(best)) {
    rep.margin = std::numeric_limits<double>::infinity();  // both sets empty
    return rep;
  }
  rep.margin = (best <= kZeroSetTol) ? 0.0 : best;
  return rep;
}

namespace {

double ray_speed(const CoefficientField& c, double L, double x) {
  return std::sqrt(c.eval(std::clamp(x, 0.0, L), L));
}

/// Advance one RK4 step of x' = dir * sqrt(c(x)); returns new position
/// (before reflection handling).
double rk4_step(const CoefficientField& c, double L, double x, double dir, double dt) {
  const double k1 = dir * ray_speed(c, L, x);
  const double k2 = dir * ray_speed(c, L, x + 0.5 * dt * k1);
  const double k3 = dir * ray_speed(c, L, x + 0.5 * dt * k2);
  const double k4 = dir * ray_speed(c, L, x + dt * k3);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Time for the ray started at (x0, dir) to enter the open interval (a, b).
double ray_entry_time(const CoefficientField& c, double L, double a, double b, double x0,
                      double dir, double dt, double t_cap) {
  double x = x0;
  double t = 0.0;
  auto inside = [&](double y) { return y > a && y < b; };
  if (inside(x)) return 0.0;
  while (t < t_cap) {
    double d = dir;
    double xn = rk4_step(c, L, x, d, dt);
    if (xn < 0.0) {
      xn = -xn;
      d = 1.0;
    } else if (xn > L) {
      xn = 2.0 * L - xn;
      d = -1.0;
    }
    if (inside(xn)) {
      // bisect the last step for the crossing time
      double lo = 0.0, hi = dt;
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        double xm = rk4_step(c, L, x, dir, mid);
        if (xm < 0.0) xm = -xm;
        if (xm > L) xm = 2.0 * L - xm;
        if (inside(xm))
          hi = mid;
        else
          lo = mid;
      }
      return t + hi;
    }
    x = xn;
    dir = d;
    t += dt;
  }
  return t_cap;
}

}  // namespace

double gcc_time(const CoefficientField& c, double a, double b, double L, double h) {
  if (!(c.min_value() > 0.0))
    throw_validation("NonPositiveCoefficient", "wave speed field must be positive");
  if (!(a >= 0.0 && b <= L && a < b))
    throw_validation("InvalidArgument", "observation interval must satisfy 0 <= a < b <= L");

  const double c_max = c.max_value();
  const double c_min = c.min_value();
  const double dt = h / (10.0 * std::sqrt(c_max));
  const double t_cap = 10.0 * (2.0 * L / std::sqrt(c_min)) + 1.0;

  double worst = 0.0;
  // left gap [0, a]: worst rays move away from omega (leftward)
  for (double x0 = 0.0; x0 <= a + 0.5 * h; x0 += h) {
    const double x = std::min(x0, a);
    worst = std::max(worst, ray_entry_time(c, L, a, b, x, -1.0, dt, t_cap));
    if (x >= a) break;
  }
  // right gap [b, L]: worst rays move rightward
  for (double x0 = b; x0 <= L + 0.5 * h; x0 += h) {
    const double x = std::min(x0, L);
    worst = std::max(worst, ray_entry_time(c, L, a, b, x, 1.0, dt, t_cap));
    if (x >= L) break;
  }
  return worst;
}

}  // namespace obslab
