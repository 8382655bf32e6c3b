#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "grid.hpp"

namespace obslab {

using cplx = std::complex<double>;

enum class EvolutionKind { Wave, Schrodinger, Heat, EvolutionK };

/// How a component's elliptic part relates to the primary operator A1.
enum class ScaleMode {
  SharedScalar,     // c2 * A1, scalar c2 > 0 (spectral path in A1's basis)
  DistinctOperator, // own operator A2 = -d/dx(c(x) d/dx) (own eigenbasis)
  SharedField,      // c2(x) * A1, variable multiplier (time-stepping path)
};

struct EvolutionSpec {
  EvolutionKind kind = EvolutionKind::Wave;
  int order = 2;  // k: Wave -> 2, Schrodinger/Heat -> 1, EvolutionK -> k >= 1
  ScaleMode scale_mode = ScaleMode::SharedScalar;
  double scale = 1.0;           // SharedScalar
  CoefficientField own_coeff;   // DistinctOperator / SharedField

  bool complex_field() const { return kind == EvolutionKind::Schrodinger; }

  static int order_of(EvolutionKind kind, int k) {
    switch (kind) {
      case EvolutionKind::Wave: return 2;
      case EvolutionKind::Schrodinger:
      case EvolutionKind::Heat: return 1;
      case EvolutionKind::EvolutionK: return k;
    }
    return k;
  }

  void validate() const {
    if (order < 1) throw_validation("InvalidArgument", "evolution order must be >= 1");
    if (order != order_of(kind, order))
      throw_validation("InvalidArgument", "evolution order inconsistent with kind");
    if (scale_mode == ScaleMode::SharedScalar && !(scale > 0.0))
      throw_validation("InvalidArgument", "scalar scale must be positive");
  }
};

/// Observation window omega x (0, T): omega = (a, b), nt odd time nodes.
struct ObservationWindow {
  double a = 0.0, b = 1.0, T = 1.0;
  int nt = 0;  // 0 -> resolved by the sampling rule at compile time
};

/// Modal initial data of one component: column s holds the s-th jet slot
/// (wave: a = slot 0, b = slot 1; k-th order: gamma_0 .. gamma_{k-1}).
struct ComponentData {
  Eigen::MatrixXcd slots;  // M x k
};

struct InitialData {
  std::vector<ComponentData> components;
};

/// Space-time samples of one component on the observation window, with the
/// quadrature that realizes the observation integral (Simpson in t, weight h in x).
struct SpaceTimeField {
  std::vector<double> times;          // nt, uniform on [0, T]
  std::vector<int> node_indices;      // interior node indices strictly inside omega
  std::vector<double> node_x;
  Eigen::MatrixXcd values;            // nt x nx
  Eigen::VectorXd time_weights;       // Simpson weights, size nt
  double h = 0.0;                     // spatial quadrature weight

  int nt() const { return static_cast<int>(times.size()); }
  int nx() const { return static_cast<int>(node_indices.size()); }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }

  /// integral of |v|^2 over the window (observation quadrature)
  double integrate_abs2() const;
  /// integral of conj(this) * other
  cplx inner(const SpaceTimeField& other) const;
  /// spatial L2(omega) norm of the row at time index t
  double space_norm(int t_index) const;
};

Eigen::VectorXd simpson_weights(int nt, double dt);

/// Synthetic field from an explicit function of (t, x) on a window grid.
SpaceTimeField make_synthetic_field(const Grid1D& grid, const ObservationWindow& window,
                                    const std::function<cplx(double, double)>& fn);

/// k x k transition matrix mapping the modal jet (y, y', ..., y^(k-1)) at time 0
/// to the jet at time t. lambda_eff is the effective modal eigenvalue
/// (scale * lambda, or the own-operator eigenvalue).
Eigen::MatrixXcd modal_propagator(const EvolutionSpec& spec, double lambda_eff, double t);

/// Precomputed position-row evaluator: row 0 of the propagator as a function
/// of t, i.e. y(t) = sum_s row(t)[s] * jet[s].
class ModalPositionRow {
 public:
  ModalPositionRow(const EvolutionSpec& spec, double lambda_eff);
  void eval(double t, cplx* out) const;  // out has spec.order entries
  int order() const { return order_; }

 private:
  EvolutionKind kind_;
  int order_;
  double lambda_;
  Eigen::VectorXcd roots_;    // EvolutionK only
  Eigen::MatrixXcd vand_inv_; // EvolutionK only
};

/// Crank-Nicolson (k=1) / implicit midpoint (k=2) integrator for
/// d^k u/dt^k + c2(x) A u = 0 with a variable multiplier field c2.
/// Data is given in the shared basis of A; dt is the internal step
/// (output is sampled on the window's time nodes).
SpaceTimeField timestep_scaled(const EllipticOperator& shared_op, const ModeBasis& basis,
                               const CoefficientField& c2, int order,
                               const ComponentData& data, const ObservationWindow& window,
                               int nt, double dt);

}  // namespace obslab
