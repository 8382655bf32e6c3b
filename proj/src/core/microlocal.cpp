#include "microlocal.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace obslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// In-place 2D DFT of a row-major array, FFTW sign conventions.
void dft2(Eigen::MatrixXcd& a, int sign) {
  const int n0 = static_cast<int>(a.rows());
  const int n1 = static_cast<int>(a.cols());
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(n0) * n1);
  for (int r = 0; r < n0; ++r)
    for (int c = 0; c < n1; ++c) buf[static_cast<std::size_t>(r) * n1 + c] = a(r, c);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_plan plan = fftw_plan_dft_2d(n0, n1, reinterpret_cast<fftw_complex*>(buf.data()),
                                      reinterpret_cast<fftw_complex*>(buf.data()), sign,
                                      FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  for (int r = 0; r < n0; ++r)
    for (int c = 0; c < n1; ++c) a(r, c) = buf[static_cast<std::size_t>(r) * n1 + c];
}

Eigen::VectorXd raised_cosine(int n, double frac) {
  Eigen::VectorXd w(n);
  const double edge = frac * (n - 1);
  for (int i = 0; i < n; ++i) {
    const double d = std::min<double>(i, n - 1 - i);
    w[i] = (d < edge) ? 0.5 * (1.0 - std::cos(std::numbers::pi * d / edge)) : 1.0;
  }
  return w;
}

}  // namespace

WindowedField make_windowed(const SpaceTimeField& field, double taper_fraction) {
  const int nt0 = field.nt();
  const int nx0 = field.nx();
  if (nt0 < 16 || nx0 < 16)
    throw_validation("WindowTooSmall", "windowed analysis needs nt, nx >= 16");

  WindowedField w;
  w.nt0 = nt0;
  w.nx0 = nx0;
  w.nt_pad = next_pow2(nt0);
  w.nx_pad = next_pow2(nx0);
  w.dt = field.dt();
  w.dx = field.h;
  w.t_extent = w.nt_pad * w.dt;
  w.x_extent = w.nx_pad * w.dx;
  w.times = field.times;
  w.node_indices = field.node_indices;
  w.node_x = field.node_x;
  w.time_weights = field.time_weights;
  w.h = field.h;

  const Eigen::VectorXd wt = raised_cosine(nt0, taper_fraction);
  const Eigen::VectorXd wx = raised_cosine(nx0, taper_fraction);

  Eigen::MatrixXcd padded = Eigen::MatrixXcd::Zero(w.nt_pad, w.nx_pad);
  double energy = 0.0;
  for (int t = 0; t < nt0; ++t)
    for (int x = 0; x < nx0; ++x) {
      const cplx v = wt[t] * wx[x] * field.values(t, x);
      padded(t, x) = v;
      energy += std::norm(v);
    }
  w.windowed_energy = energy * w.dt * w.dx;

  dft2(padded, FFTW_FORWARD);
  w.hat = (w.dt * w.dx) * padded;
  return w;
}

SpaceTimeField inverse_transform(const WindowedField& w) {
  Eigen::MatrixXcd a = w.hat / (w.dt * w.dx * w.nt_pad * w.nx_pad);
  dft2(a, FFTW_BACKWARD);
  SpaceTimeField f;
  f.times = w.times;
  f.node_indices = w.node_indices;
  f.node_x = w.node_x;
  f.time_weights = w.time_weights;
  f.h = w.h;
  f.values = a.topLeftCorner(w.nt0, w.nx0);
  return f;
}

double aniso_norm(const WindowedField& w, double s) {
  double acc = 0.0;
  for (int m = 0; m < w.nt_pad; ++m) {
    const double t2 = kTwoPi * w.tau(m) * kTwoPi * w.tau(m);
    for (int n = 0; n < w.nx_pad; ++n) {
      const double x2 = kTwoPi * w.xi(n) * kTwoPi * w.xi(n);
      const double kp4 = 1.0 + t2 + x2 * x2;
      acc += std::pow(kp4, 0.5 * s) * std::norm(w.hat(m, n));
    }
  }
  return std::sqrt(acc * w.dual_cell());
}

WindowedField frac_dt(const WindowedField& w, int s) {
  if (s < 1) throw_validation("InvalidArgument", "frac_dt needs s >= 1");
  WindowedField out = w;
  for (int m = 0; m < w.nt_pad; ++m) {
    cplx mult(1.0, 0.0);
    const cplx root = std::sqrt(cplx(0.0, kTwoPi * w.tau(m)));
    for (int i = 0; i < s; ++i) mult *= root;
    out.hat.row(m) *= mult;
  }
  // Parseval value of the multiplied data
  out.windowed_energy = out.hat.cwiseAbs2().sum() * out.dual_cell();
  return out;
}

AngularDensity angular_density(const WindowedField& w, ScalingTag scaling, int n_bins,
                               double r0) {
  if (n_bins < 36) throw_validation("InvalidArgument", "need n_bins >= 36");

  AngularDensity d;
  d.scaling = scaling;
  d.n_bins = n_bins;
  d.masses.assign(n_bins, 0.0);
  d.total = w.windowed_energy;

  const double dtau = 1.0 / w.t_extent;
  const double dxi = 1.0 / w.x_extent;
  const double r0_classical = r0 * std::max(dtau, dxi);
  const double r0_gauge = parabolic_gauge({r0 * dtau, r0 * dxi});
  const double binw = kTwoPi / n_bins;
  const double cell = w.dual_cell();

  for (int m = 0; m < w.nt_pad; ++m) {
    const double tau = w.tau(m);
    for (int n = 0; n < w.nx_pad; ++n) {
      const double xi = w.xi(n);
      const double e = std::norm(w.hat(m, n)) * cell;
      if (e == 0.0) continue;

      bool excluded;
      double phi;
      if (scaling == ScalingTag::Classical) {
        const double r = std::hypot(tau, xi);
        excluded = r < r0_classical;
        phi = excluded ? 0.0 : std::atan2(xi, tau);
      } else {
        excluded = (tau == 0.0 && xi == 0.0) || parabolic_gauge({tau, xi}) < r0_gauge;
        if (!excluded) {
          const DualPoint p = parabolic_project({tau, xi});
          phi = std::atan2(p.xi / std::sqrt(2.0), p.tau);
        } else {
          phi = 0.0;
        }
      }
      if (excluded) {
        d.excluded_mass += e;
        continue;
      }
      if (phi < 0.0) phi += kTwoPi;
      int b = static_cast<int>(phi / binw);
      if (b >= n_bins) b = n_bins - 1;
      d.masses[b] += e;
    }
  }
  return d;
}

AngularDensity angular_density(const SpaceTimeField& field, ScalingTag scaling, int n_bins,
                               double r0, double taper_fraction) {
  return angular_density(make_windowed(field, taper_fraction), scaling, n_bins, r0);
}

double mass_near_angle(const AngularDensity& d, double angle, int halfwidth_bins) {
  const double non = d.nonexcluded();
  if (!(non > 0.0)) return 0.0;
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  const int center = std::min(d.n_bins - 1, static_cast<int>(a / (kTwoPi / d.n_bins)));
  double acc = 0.0;
  for (int off = -halfwidth_bins; off <= halfwidth_bins; ++off) {
    const int b = ((center + off) % d.n_bins + d.n_bins) % d.n_bins;
    acc += d.masses[b];
  }
  return acc / non;
}

double mass_near_char_set(const AngularDensity& d, const std::vector<CharPoint>& zeros,
                          double eps) {
  const double non = d.nonexcluded();
  if (!(non > 0.0) || zeros.empty()) return 0.0;
  double acc = 0.0;
  for (int b = 0; b < d.n_bins; ++b) {
    if (d.masses[b] == 0.0) continue;
    const DualPoint c = hypersurface_point(d.scaling, d.bin_center(b));
    double dist = std::numeric_limits<double>::infinity();
    for (const CharPoint& z : zeros)
      dist = std::min(dist, std::hypot(c.tau - z.pt.tau, c.xi - z.pt.xi));
    if (dist <= eps) acc += d.masses[b];
  }
  return acc / non;
}

std::vector<LocalisationRow> localisation_test(const std::vector<SpaceTimeField>& members,
                                               const PrincipalSymbol& symbol, double a,
                                               double b, ScalingTag scaling, double eps,
                                               int n_bins, double r0) {
  std::vector<CharPoint> zeros =
      sample_characteristic_set(symbol, a, b, scaling, 720, 100);
  std::vector<LocalisationRow> rows;
  for (std::size_t n = 0; n < members.size(); ++n) {
    AngularDensity d = angular_density(members[n], scaling, n_bins, r0);
    LocalisationRow row;
    row.n = static_cast<int>(n) + 1;
    row.total_mass = d.total;
    row.nonexcluded_mass = d.nonexcluded();
    row.fraction = zeros.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : mass_near_char_set(d, zeros, eps);
    rows.push_back(row);
  }
  return rows;
}

std::vector<SpaceTimeField> mode_family(const CompiledScenario& cs,
                                        const std::vector<int>& modes, int component) {
  std::vector<SpaceTimeField> members;
  for (int m : modes) {
    if (m < 1 || m > cs.cutoff())
      throw_validation("InvalidArgument", "family mode index outside cutoff");
    InitialData data;
    data.components.resize(cs.n_components());
    for (int i = 0; i < cs.n_components(); ++i)
      data.components[i].slots = Eigen::MatrixXcd::Zero(
          cs.cutoff(), cs.scenario.components[i].evo.order);
    data.components[component].slots(m - 1, 0) = cplx(1.0, 0.0);
    members.push_back(std::move(solve(cs, data)[component]));
  }
  return members;
}

CounterexampleTables counterexample_demo(const std::vector<double>& theta, int n_max,
                                         int n_bins) {
  const int count = static_cast<int>(theta.size());
  if (n_max < 1 || n_max > count)
    throw_validation("InvalidArgument", "n_max must lie within the theta sequence length");
  double sum = 0.0;
  for (double t : theta) {
    if (!(t > 0.0))
      throw_validation("SequenceNotAveraging", "theta values must be positive");
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw_validation("SequenceNotAveraging", "theta must sum to 1");

  // synthetic window: unit square, 63 interior nodes, 65 time nodes
  Grid1D grid{1.0, 63};
  ObservationWindow window{0.0, 1.0, 1.0, 65};

  auto plane_wave = [&](double kappa, double direction) {
    SpaceTimeField f = make_synthetic_field(grid, window, [&](double t, double x) {
      const double phase = kTwoPi * kappa * (x + direction * t);
      return cplx(std::cos(phase), std::sin(phase));
    });
    f.values /= std::sqrt(f.integrate_abs2());
    return f;
  };

  CounterexampleTables tables;
  tables.u_angle = std::atan2(1.0, -1.0);  // spikes at (-kappa, kappa)
  tables.f_angle = std::atan2(1.0, 1.0);   // spikes at (+kappa, kappa)
  tables.i_fixed = 1;

  for (int n = 1; n <= n_max; ++n) {
    const double kappa = 4.0 + 2.0 * n;
    SpaceTimeField u = plane_wave(kappa, -1.0);
    SpaceTimeField f = plane_wave(kappa, +1.0);

    // fixed member i = 1: theta_1 u^n unless n == 1 (then f^1)
    const SpaceTimeField& fixed = (n == tables.i_fixed) ? f : u;
    tables.fixed_f_fraction.push_back(mass_near_angle(
        angular_density(fixed, ScalingTag::Classical, n_bins), tables.f_angle));

    // superposed: sum_i v_i^n = (1 - theta_n) u^n + f^n
    SpaceTimeField sum_field = u;
    sum_field.values = (1.0 - theta[n - 1]) * u.values + f.values;
    tables.superposed_f_fraction.push_back(mass_near_angle(
        angular_density(sum_field, ScalingTag::Classical, n_bins), tables.f_angle));

    // Lemma-compliant control family: v_i^n = theta_i u^n sums to u^n
    tables.compliant_f_fraction.push_back(mass_near_angle(
        angular_density(u, ScalingTag::Classical, n_bins), tables.f_angle));
  }
  return tables;
}

}  // namespace obslab
