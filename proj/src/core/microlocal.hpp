#pragma once

#include "observability.hpp"
#include "scenario.hpp"
#include "symbols.hpp"

namespace obslab {

/// A space-time field tapered by a separable raised cosine, zero-padded to
/// FFT-friendly sizes, carried in the dual domain. Dual grid:
/// tau_m = m / T_pad, xi_n = n / L_pad (signed DFT frequencies).
struct WindowedField {
  Eigen::MatrixXcd hat;  // nt_pad x nx_pad, continuous normalization dt*dx*DFT
  int nt_pad = 0, nx_pad = 0;
  int nt0 = 0, nx0 = 0;  // original window sizes
  double dt = 0.0, dx = 0.0;
  double t_extent = 0.0, x_extent = 0.0;  // padded extents
  double windowed_energy = 0.0;           // time-domain |taper * u|^2 dt dx

  // source metadata, kept so fields can be reconstructed on the window grid
  std::vector<double> times;
  std::vector<int> node_indices;
  std::vector<double> node_x;
  Eigen::VectorXd time_weights;
  double h = 0.0;

  double tau(int m) const {
    const int s = (m < (nt_pad + 1) / 2) ? m : m - nt_pad;
    return s / t_extent;
  }
  double xi(int n) const {
    const int s = (n < (nx_pad + 1) / 2) ? n : n - nx_pad;
    return s / x_extent;
  }
  double dual_cell() const { return 1.0 / (t_extent * x_extent); }
};

WindowedField make_windowed(const SpaceTimeField& field, double taper_fraction = 0.25);

/// Inverse transform of the dual data, cropped back to the window grid.
SpaceTimeField inverse_transform(const WindowedField& w);

/// Anisotropic H^{s/2, s} norm with weight k_p = (1 + (2pi tau)^2 + (2pi xi)^4)^{1/4}.
double aniso_norm(const WindowedField& w, double s);

/// s applications of the half time derivative sqrt(d_t): dual multiplier
/// (sqrt(2 pi i tau))^s, principal branch.
WindowedField frac_dt(const WindowedField& w, int s = 1);

struct AngularDensity {
  ScalingTag scaling = ScalingTag::Classical;
  int n_bins = 72;
  std::vector<double> masses;
  double excluded_mass = 0.0;
  double total = 0.0;  // windowed energy

  double bin_center(int b) const { return (b + 0.5) * 2.0 * std::numbers::pi / n_bins; }
  double nonexcluded() const { return total - excluded_mass; }
};

/// Windowed FFT energy binned by direction on S^1 (classical) or by the
/// parabolic projection onto the ellipsoid P (parabolic). Dual points below
/// r0 grid frequencies (classical radius / parabolic gauge) are excluded.
AngularDensity angular_density(const WindowedField& w, ScalingTag scaling, int n_bins,
                               double r0 = 4.0);
AngularDensity angular_density(const SpaceTimeField& field, ScalingTag scaling, int n_bins,
                               double r0 = 4.0, double taper_fraction = 0.25);

/// Fraction of non-excluded mass in bins within +-halfwidth bins of `angle`.
double mass_near_angle(const AngularDensity& d, double angle, int halfwidth_bins = 2);

/// Fraction of non-excluded mass in bins whose center lies within eps
/// (Euclidean, on the hypersurface) of the sampled characteristic set.
double mass_near_char_set(const AngularDensity& d, const std::vector<CharPoint>& zeros,
                          double eps);

struct LocalisationRow {
  int n;
  double fraction;          // NaN when the characteristic set is empty
  double nonexcluded_mass;
  double total_mass;
};
/// Per-member concentration of the angular density near {symbol = 0}. For an
/// empty characteristic set the non-excluded mass itself is the quantity of
/// interest (members carry unit initial energy).
std::vector<LocalisationRow> localisation_test(const std::vector<SpaceTimeField>& members,
                                               const PrincipalSymbol& symbol, double a,
                                               double b, ScalingTag scaling, double eps,
                                               int n_bins = 72, double r0 = 4.0);

/// Solution family u^n with initial datum = mode m(n) of one component
/// (unit initial energy).
std::vector<SpaceTimeField> mode_family(const CompiledScenario& cs,
                                        const std::vector<int>& modes, int component = 0);

struct CounterexampleTables {
  std::vector<double> fixed_f_fraction;       // member v_{i0}^n for n = 1..n_max
  std::vector<double> superposed_f_fraction;  // sum_i v_i^n
  std::vector<double> compliant_f_fraction;   // v_i^n = theta_i u^n (control family)
  double u_angle = 0.0, f_angle = 0.0;
  int i_fixed = 1;  // 1-based
};
/// Superposition counterexample: u^n, f^n are tapered plane waves along
/// tau = -xi and tau = +xi; v_i^n = theta_i u^n except v_n^n = f^n.
CounterexampleTables counterexample_demo(const std::vector<double>& theta, int n_max,
                                         int n_bins = 72);

}  // namespace obslab
