#include "evolution.hpp"

#include <cmath>
#include <numbers>

namespace obslab {

Eigen::VectorXd simpson_weights(int nt, double dt) {
  if (nt < 3 || nt % 2 == 0)
    throw_validation("InvalidArgument", "Simpson quadrature needs an odd nt >= 3");
  Eigen::VectorXd w(nt);
  w[0] = w[nt - 1] = dt / 3.0;
  for (int i = 1; i + 1 < nt; ++i) w[i] = (i % 2 == 1 ? 4.0 : 2.0) * dt / 3.0;
  return w;
}

double SpaceTimeField::integrate_abs2() const {
  Eigen::VectorXd row_sums = values.cwiseAbs2().rowwise().sum();
  return h * time_weights.dot(row_sums);
}

cplx SpaceTimeField::inner(const SpaceTimeField& other) const {
  cplx acc(0.0, 0.0);
  for (int t = 0; t < nt(); ++t)
    acc += time_weights[t] * (values.row(t).conjugate().cwiseProduct(other.values.row(t))).sum();
  return h * acc;
}

double SpaceTimeField::space_norm(int t_index) const {
  return std::sqrt(h * values.row(t_index).squaredNorm());
}

static std::vector<int> window_array_indices(const Grid1D& grid, double a, double b) {
  const double h = grid.h();
  const int ia = static_cast<int>(std::lround(a / h));
  const int ib = static_cast<int>(std::lround(b / h));
  std::vector<int> idx;
  for (int i = ia + 1; i <= ib - 1; ++i)
    if (i >= 1 && i <= grid.n_interior) idx.push_back(i - 1);
  return idx;
}

static SpaceTimeField field_shell(const Grid1D& grid, const ObservationWindow& window,
                                  int nt) {
  SpaceTimeField f;
  const double dt = window.T / (nt - 1);
  f.times.resize(nt);
  for (int t = 0; t < nt; ++t) f.times[t] = t * dt;
  f.time_weights = simpson_weights(nt, dt);
  std::vector<int> idx = window_array_indices(grid, window.a, window.b);
  if (idx.empty())
    throw_validation("InvalidArgument", "observation window contains no interior nodes");
  f.node_indices = idx;
  f.node_x.resize(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) f.node_x[k] = grid.node(idx[k] + 1);
  f.h = grid.h();
  f.values.setZero(nt, static_cast<int>(idx.size()));
  return f;
}

SpaceTimeField make_synthetic_field(const Grid1D& grid, const ObservationWindow& window,
                                    const std::function<cplx(double, double)>& fn) {
  if (window.nt <= 0)
    throw_validation("InvalidArgument", "synthetic field needs an explicit nt");
  SpaceTimeField f = field_shell(grid, window, window.nt);
  for (int t = 0; t < f.nt(); ++t)
    for (int k = 0; k < f.nx(); ++k) f.values(t, k) = fn(f.times[t], f.node_x[k]);
  return f;
}

static Eigen::VectorXcd evolution_roots(int k, double lambda_eff) {
  // the k distinct roots of r^k = -lambda_eff
  const double mag = std::pow(lambda_eff, 1.0 / k);
  Eigen::VectorXcd roots(k);
  for (int m = 0; m < k; ++m) {
    const double arg = std::numbers::pi * (2.0 * m + 1.0) / k;
    roots[m] = mag * cplx(std::cos(arg), std::sin(arg));
  }
  return roots;
}

Eigen::MatrixXcd modal_propagator(const EvolutionSpec& spec, double lambda_eff, double t) {
  if (!(lambda_eff > 0.0))
    throw_validation("InvalidArgument", "modal eigenvalue must be positive");
  if (t < 0.0) throw_validation("InvalidArgument", "time must be nonnegative");

  switch (spec.kind) {
    case EvolutionKind::Wave: {
      const double w = std::sqrt(lambda_eff);
      Eigen::MatrixXcd p(2, 2);
      p(0, 0) = std::cos(w * t);
      p(0, 1) = std::sin(w * t) / w;
      p(1, 0) = -w * std::sin(w * t);
      p(1, 1) = std::cos(w * t);
      return p;
    }
    case EvolutionKind::Heat: {
      Eigen::MatrixXcd p(1, 1);
      p(0, 0) = std::exp(-lambda_eff * t);
      return p;
    }
    case EvolutionKind::Schrodinger: {
      Eigen::MatrixXcd p(1, 1);
      p(0, 0) = std::exp(cplx(0.0, -lambda_eff * t));
      return p;
    }
    case EvolutionKind::EvolutionK: {
      const int k = spec.order;
      Eigen::VectorXcd roots = evolution_roots(k, lambda_eff);
      Eigen::MatrixXcd vand(k, k), wt(k, k);
      for (int m = 0; m < k; ++m) {
        cplx p(1.0, 0.0);
        const cplx e = std::exp(roots[m] * t);
        for (int j = 0; j < k; ++j) {
          vand(j, m) = p;
          wt(j, m) = p * e;
          p *= roots[m];
        }
      }
      return wt * vand.inverse();
    }
  }
  throw_validation("InvalidArgument", "unknown evolution kind");
}

ModalPositionRow::ModalPositionRow(const EvolutionSpec& spec, double lambda_eff)
    : kind_(spec.kind), order_(spec.order), lambda_(lambda_eff) {
  if (!(lambda_eff > 0.0))
    throw_validation("InvalidArgument", "modal eigenvalue must be positive");
  if (kind_ == EvolutionKind::EvolutionK) {
    roots_ = evolution_roots(order_, lambda_eff);
    Eigen::MatrixXcd vand(order_, order_);
    for (int m = 0; m < order_; ++m) {
      cplx p(1.0, 0.0);
      for (int j = 0; j < order_; ++j) {
        vand(j, m) = p;
        p *= roots_[m];
      }
    }
    vand_inv_ = vand.inverse();
  }
}

void ModalPositionRow::eval(double t, cplx* out) const {
  switch (kind_) {
    case EvolutionKind::Wave: {
      const double w = std::sqrt(lambda_);
      out[0] = std::cos(w * t);
      out[1] = std::sin(w * t) / w;
      return;
    }
    case EvolutionKind::Heat:
      out[0] = std::exp(-lambda_ * t);
      return;
    case EvolutionKind::Schrodinger:
      out[0] = std::exp(cplx(0.0, -lambda_ * t));
      return;
    case EvolutionKind::EvolutionK: {
      // row 0 of W(t) V^{-1}: sum_m e^{r_m t} Vinv(m, s)
      for (int s = 0; s < order_; ++s) out[s] = cplx(0.0, 0.0);
      for (int m = 0; m < order_; ++m) {
        const cplx e = std::exp(roots_[m] * t);
        for (int s = 0; s < order_; ++s) out[s] += e * vand_inv_(m, s);
      }
      return;
    }
  }
}

namespace {

/// General tridiagonal system, Thomas algorithm (matrices here are strictly
/// diagonally dominant, no pivoting needed).
struct Tridiag {
  Eigen::VectorXd lower, diag, upper;  // lower: (i, i-1), upper: (i, i+1)

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const {
    const int n = static_cast<int>(diag.size());
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      double v = diag[i] * u[i];
      if (i > 0) v += lower[i - 1] * u[i - 1];
      if (i + 1 < n) v += upper[i] * u[i + 1];
      r[i] = v;
    }
    return r;
  }

  Eigen::VectorXd solve(Eigen::VectorXd rhs) const {
    const int n = static_cast<int>(diag.size());
    Eigen::VectorXd c(n), x(n);
    double piv = diag[0];
    c[0] = upper.size() ? upper[0] / piv : 0.0;
    rhs[0] /= piv;
    for (int i = 1; i < n; ++i) {
      piv = diag[i] - lower[i - 1] * c[i - 1];
      c[i] = (i + 1 < n) ? upper[i] / piv : 0.0;
      rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / piv;
    }
    x[n - 1] = rhs[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = rhs[i] - c[i] * x[i + 1];
    return x;
  }
};

Tridiag scaled_operator(const EllipticOperator& op, const CoefficientField& c2) {
  const int n = op.size();
  const Grid1D& g = op.grid();
  Eigen::VectorXd cvals(n);
  for (int i = 0; i < n; ++i) cvals[i] = c2.eval(g.node(i + 1), g.length);
  Tridiag m;
  m.diag = cvals.cwiseProduct(op.diagonal());
  m.lower.resize(n - 1);
  m.upper.resize(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    m.upper[i] = cvals[i] * op.off_diagonal()[i];
    m.lower[i] = cvals[i + 1] * op.off_diagonal()[i];
  }
  return m;
}

Tridiag shifted(const Tridiag& m, double alpha) {
  // I + alpha * m
  Tridiag r;
  r.lower = alpha * m.lower;
  r.upper = alpha * m.upper;
  r.diag = (alpha * m.diag).array() + 1.0;
  return r;
}

}  // namespace

SpaceTimeField timestep_scaled(const EllipticOperator& shared_op, const ModeBasis& basis,
                               const CoefficientField& c2, int order,
                               const ComponentData& data, const ObservationWindow& window,
                               int nt, double dt) {
  if (order < 1 || order > 2)
    throw_validation("UnsupportedOrder",
                     "variable-coefficient time stepping supports k in {1, 2}");
  if (!(c2.min_value() > 0.0))
    throw_validation("NonPositiveCoefficient", "multiplier field must be positive");
  if (data.slots.cols() != order || data.slots.rows() != basis.count())
    throw_validation("CutoffMismatch", "initial data shape does not match order/cutoff");

  // dt must resolve the stiffest retained mode
  const double rate =
      std::pow(c2.max_value() * basis.eigenvalues[basis.count() - 1], 1.0 / order);
  if (dt > 0.1 / rate)
    throw_validation("InvalidArgument", "time step too large for the stiffest retained mode");

  SpaceTimeField f = field_shell(shared_op.grid(), window, nt);
  const double dt_out = f.dt();
  const int substeps = std::max(1, static_cast<int>(std::ceil(dt_out / dt)));
  const double dts = dt_out / substeps;

  const Tridiag ca = scaled_operator(shared_op, c2);

  Eigen::VectorXd u = basis.modes * data.slots.col(0).real();
  Eigen::VectorXd v;
  if (order == 2) v = basis.modes * data.slots.col(1).real();

  auto record = [&](int t_index) {
    for (int k = 0; k < f.nx(); ++k) f.values(t_index, k) = u[f.node_indices[k]];
  };
  record(0);

  if (order == 1) {
    const Tridiag plus = shifted(ca, 0.5 * dts);
    const Tridiag minus = shifted(ca, -0.5 * dts);
    for (int t = 1; t < nt; ++t) {
      for (int s = 0; s < substeps; ++s) u = plus.solve(minus.apply(u));
      record(t);
    }
  } else {
    const double q = 0.25 * dts * dts;
    const Tridiag plus = shifted(ca, q);
    const Tridiag minus = shifted(ca, -q);
    for (int t = 1; t < nt; ++t) {
      for (int s = 0; s < substeps; ++s) {
        Eigen::VectorXd rhs = minus.apply(u) + dts * v;
        Eigen::VectorXd u_new = plus.solve(rhs);
        v -= 0.5 * dts * ca.apply(u + u_new);
        u = std::move(u_new);
      }
      record(t);
    }
  }
  return f;
}

}  // namespace obslab
