#include "grid.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace obslab {

EllipticOperator build_elliptic(const Grid1D& grid, const CoefficientField& coeff) {
  grid.validate();
  if (!(coeff.min_value() > 0.0))
    throw_validation("NonPositiveCoefficient",
                     "elliptic coefficient must satisfy inf c > 0");

  const int n = grid.n_interior;
  const double h = grid.h();
  const double inv_h2 = 1.0 / (h * h);
  const double L = grid.length;

  // midpoint evaluation at half-nodes x_{i+1/2}
  Eigen::VectorXd half(n + 1);
  for (int i = 0; i <= n; ++i) half[i] = coeff.eval((i + 0.5) * h, L);

  Eigen::VectorXd diag(n), off(n - 1);
  for (int i = 0; i < n; ++i) diag[i] = (half[i] + half[i + 1]) * inv_h2;
  for (int i = 0; i + 1 < n; ++i) off[i] = -half[i + 1] * inv_h2;

  return EllipticOperator(grid, coeff, std::move(diag), std::move(off));
}

ModeBasis eigendecompose(const EllipticOperator& op, int count) {
  const int n = op.size();
  if (count < 1 || count > n)
    throw_validation("InvalidArgument", "mode count must satisfy 1 <= M <= N");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(op.diagonal(), op.off_diagonal(),
                                Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw_numeric("ConvergenceFailure", "tridiagonal eigensolver did not converge");

  const double h = op.grid().h();
  const double inv_sqrt_h = 1.0 / std::sqrt(h);

  ModeBasis basis;
  basis.h = h;
  basis.eigenvalues = solver.eigenvalues().head(count);
  basis.modes = solver.eigenvectors().leftCols(count) * inv_sqrt_h;

  // sign convention: positive at the first interior node
  for (int j = 0; j < count; ++j) {
    double lead = basis.modes(0, j);
    for (int i = 1; lead == 0.0 && i < n; ++i) lead = basis.modes(i, j);
    if (lead < 0.0) basis.modes.col(j) = -basis.modes.col(j);
  }

  if (!(basis.eigenvalues[0] > 0.0))
    throw_numeric("ConvergenceFailure", "smallest eigenvalue is not positive");

  // contract: residual <= 1e-10 * lambda_M, orthonormality <= 1e-10
  const double lam_max = basis.eigenvalues[count - 1];
  for (int j = 0; j < count; ++j) {
    Eigen::VectorXd r =
        op.apply(basis.modes.col(j)) - basis.eigenvalues[j] * basis.modes.col(j);
    const double resid = std::sqrt(h * r.squaredNorm());
    if (resid > 1e-10 * lam_max)
      throw_numeric("ConvergenceFailure", "eigen residual exceeds tolerance");
  }
  Eigen::MatrixXd gram = h * (basis.modes.transpose() * basis.modes);
  gram -= Eigen::MatrixXd::Identity(count, count);
  if (gram.cwiseAbs().maxCoeff() > 1e-10)
    throw_numeric("ConvergenceFailure", "modes are not orthonormal to tolerance");

  return basis;
}

}  // namespace obslab
