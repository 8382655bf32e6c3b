#pragma once

#include <optional>

#include "scenario.hpp"

namespace obslab {

/// Observation Gramian over the free initial-data coordinates, together with
/// the diagonal energy form E and the diagonal compact-term form K.
struct Gramian {
  Eigen::MatrixXcd g;       // P x P Hermitian PSD
  Eigen::VectorXd energy;   // E diagonal, positive
  Eigen::VectorXd compact;  // K diagonal (added to G iff compact_on)
  bool compact_on = false;
  FreeLayout layout;

  struct Coord {
    int component;
    int slot;
    int mode;  // 0-based
  };
  std::vector<Coord> coords;

  double herm_residual = 0.0;    // max |G - G*| before symmetrization
  bool growth_warning = false;   // some modal solution grew past 1e6 x initial

  int dim() const { return static_cast<int>(g.rows()); }
};

/// Energy weights per free coordinate: slot s of any component carries
/// lambda_j^{-s} (L2 for slot 0, H^{-s} spectrally realized).
Eigen::VectorXd energy_weights(const CompiledScenario& cs, const FreeLayout& layout);
/// Compact-term weights: lambda_j^{-s-1} per slot s.
Eigen::VectorXd compact_weights(const CompiledScenario& cs, const FreeLayout& layout);

Gramian assemble_gramian(const CompiledScenario& cs);

struct ObservabilityReport {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double c_obs = 0.0;  // 1/sigma_min, +inf when sigma_min is at noise level
  Eigen::VectorXcd extremal;  // full free coordinates, unit norm, deterministic phase
  int m0 = 1;
  int cutoff = 0;
  int dim = 0;
  bool compact_on = false;
  bool growth_warning = false;
};

/// sigma_min / sigma_max of E^{-1/2}(G + K)E^{-1/2} restricted to modes >= m0.
ObservabilityReport observability_constants(const Gramian& gram, int m0 = 1);

struct SweepRow {
  int m0;
  double sigma_min;
  double c_obs;
};
std::vector<SweepRow> weak_constant_sweep(const Gramian& gram, int m0_lo, int m0_hi);

/// Independent-coupling constants on the joint data space (E = block diag of
/// every component's energy).
ObservabilityReport simultaneous_constants(const CompiledScenario& cs);

struct KernelElement {
  double sigma;
  double residual_l2_omega;  // || sum_i theta_i u_i(0) ||_{L2(omega)}
  Eigen::VectorXcd data;     // unit-energy free coordinates
};
struct EigenMatch {
  int mode_primary;   // 1-based
  int mode_secondary;
  double lambda_pow;  // lambda_1^{k/2}
  double lambda_2;
  double combo_norm;  // || theta_1 phi_j + theta_i phi_l ||_{L2(omega)}
};
struct KernelScanResult {
  std::vector<KernelElement> near_kernel;
  double sigma_max = 0.0;
  double tol = 1e-8;
  // matched-eigenvalue criterion per perturbation component
  struct ComponentCriterion {
    int component;
    double delta;
    std::vector<EigenMatch> matches;
    std::optional<double> min_combo_norm;  // empty when no matches (vacuous pass)
  };
  std::vector<ComponentCriterion> criteria;
};
KernelScanResult kernel_scan(const CompiledScenario& cs, double tol = 1e-8,
                             double delta = 1e-6);

struct SuperpositionRow {
  int family;      // index into the theta family list
  int truncation;  // I
  double theta1;
  double sigma_min;
  double c_obs;
};
struct SuperpositionResult {
  std::vector<SuperpositionRow> rows;
  std::vector<double> component_bound;  // C_u per component (L2(window) per unit energy)
};
/// Sweep over truncations and averaging-sequence families; every component is
/// linked to component 1's data.
SuperpositionResult superposition_constants(const CompiledScenario& cs,
                                            const std::vector<int>& truncations,
                                            const std::vector<std::vector<double>>& families);

struct ConeCheck {
  double norm_primary;    // || u_1(0) ||_{L2(omega)}
  double norm_secondary;  // || u_2(0) ||_{L2(omega)}
  bool feasible;
};
ConeCheck cone_check(const CompiledScenario& cs, const Eigen::VectorXcd& free);

/// Observation energy computed by direct simulation: solve every component,
/// superpose with the weights, run the window quadrature. Independent of the
/// Gramian assembly path; v* G v must match it.
double direct_observation_energy(const CompiledScenario& cs, const Eigen::VectorXcd& free);

/// Seeded random free-data vectors normalized to unit energy.
std::vector<Eigen::VectorXcd> random_unit_data(const CompiledScenario& cs,
                                               std::uint64_t seed, int count);

}  // namespace obslab
