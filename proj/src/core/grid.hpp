#pragma once

#include <Eigen/Dense>
#include <vector>

#include "errors.hpp"

namespace obslab {

/// Uniform 1D grid on (0, L) with Dirichlet boundary, N interior nodes.
/// Nodes are x_i = i*h for i = 0..N+1, h = L/(N+1); i = 0 and i = N+1 are boundary.
struct Grid1D {
  double length = 1.0;
  int n_interior = 2;

  double h() const { return length / (n_interior + 1); }
  double node(int i) const { return i * h(); }

  void validate() const {
    if (!(length > 0.0))
      throw_validation("InvalidGrid", "domain length must be positive");
    if (n_interior < 2)
      throw_validation("InvalidGrid", "need at least 2 interior nodes");
  }
};

/// Scalar coefficient c(x) on [0, L]: constant, piecewise constant over
/// breakpoints, or per-node samples (node-aligned incl. boundary, linearly
/// interpolated between nodes).
class CoefficientField {
 public:
  enum class Kind { Constant, Piecewise, Samples };

  static CoefficientField constant(double value) {
    CoefficientField f;
    f.kind_ = Kind::Constant;
    f.values_ = {value};
    return f;
  }

  /// `breaks` ascending, strictly inside the domain; values.size() == breaks.size() + 1.
  /// Value i applies on [break_{i-1}, break_i).
  static CoefficientField piecewise(std::vector<double> breaks, std::vector<double> values) {
    if (values.size() != breaks.size() + 1)
      throw_validation("SchemaError", "piecewise coefficient needs breaks.size()+1 values");
    for (std::size_t i = 1; i < breaks.size(); ++i)
      if (!(breaks[i] > breaks[i - 1]))
        throw_validation("SchemaError", "piecewise breaks must be strictly ascending");
    CoefficientField f;
    f.kind_ = Kind::Piecewise;
    f.breaks_ = std::move(breaks);
    f.values_ = std::move(values);
    return f;
  }

  /// Node-aligned samples over [0, L] including both boundary nodes.
  static CoefficientField samples(std::vector<double> values) {
    if (values.size() < 2)
      throw_validation("SchemaError", "sampled coefficient needs at least 2 values");
    CoefficientField f;
    f.kind_ = Kind::Samples;
    f.values_ = std::move(values);
    return f;
  }

  CoefficientField() : kind_(Kind::Constant), values_{1.0} {}

  Kind kind() const { return kind_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& breaks() const { return breaks_; }

  /// Evaluate at x in [0, L]. `domain_length` is only needed for the sampled form.
  double eval(double x, double domain_length) const {
    switch (kind_) {
      case Kind::Constant:
        return values_[0];
      case Kind::Piecewise: {
        std::size_t i = 0;
        while (i < breaks_.size() && x >= breaks_[i]) ++i;
        return values_[i];
      }
      case Kind::Samples: {
        const double d = domain_length / static_cast<double>(values_.size() - 1);
        double s = x / d;
        if (s <= 0.0) return values_.front();
        if (s >= static_cast<double>(values_.size() - 1)) return values_.back();
        const auto i = static_cast<std::size_t>(s);
        const double w = s - static_cast<double>(i);
        return (1.0 - w) * values_[i] + w * values_[i + 1];
      }
    }
    return values_[0];
  }

  double min_value() const {
    double m = values_[0];
    for (double v : values_) m = std::min(m, v);
    return m;
  }

  double max_value() const {
    double m = values_[0];
    for (double v : values_) m = std::max(m, v);
    return m;
  }

 private:
  Kind kind_;
  std::vector<double> breaks_;
  std::vector<double> values_;
};

/// Symmetric tridiagonal discretization of -d/dx(c(x) d/dx) with Dirichlet
/// conditions: (Au)_i = [c_{i+1/2}(u_i - u_{i+1}) + c_{i-1/2}(u_i - u_{i-1})]/h^2.
class EllipticOperator {
 public:
  EllipticOperator() = default;
  EllipticOperator(Grid1D grid, CoefficientField coeff, Eigen::VectorXd diag,
                   Eigen::VectorXd offdiag)
      : grid_(grid),
        coeff_(std::move(coeff)),
        diag_(std::move(diag)),
        offdiag_(std::move(offdiag)) {}

  const Grid1D& grid() const { return grid_; }
  const CoefficientField& coeff() const { return coeff_; }
  const Eigen::VectorXd& diagonal() const { return diag_; }
  const Eigen::VectorXd& off_diagonal() const { return offdiag_; }
  int size() const { return static_cast<int>(diag_.size()); }
  double trace() const { return diag_.sum(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const {
    const int n = size();
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      double v = diag_[i] * u[i];
      if (i > 0) v += offdiag_[i - 1] * u[i - 1];
      if (i + 1 < n) v += offdiag_[i] * u[i + 1];
      r[i] = v;
    }
    return r;
  }

 private:
  Grid1D grid_;
  CoefficientField coeff_;
  Eigen::VectorXd diag_;     // N
  Eigen::VectorXd offdiag_;  // N-1
};

/// First M eigenpairs of an EllipticOperator, orthonormal in the discrete
/// L2 inner product <u,v> = h * sum_i u_i v_i, eigenvalues ascending,
/// each mode positive at the first interior node.
struct ModeBasis {
  Eigen::VectorXd eigenvalues;  // M, ascending, > 0
  Eigen::MatrixXd modes;        // N x M, discrete-L2 orthonormal columns
  double h = 0.0;

  int count() const { return static_cast<int>(eigenvalues.size()); }
  int n_nodes() const { return static_cast<int>(modes.rows()); }
};

EllipticOperator build_elliptic(const Grid1D& grid, const CoefficientField& coeff);
ModeBasis eigendecompose(const EllipticOperator& op, int count);

}  // namespace obslab
