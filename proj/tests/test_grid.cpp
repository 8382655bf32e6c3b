#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "core/grid.hpp"

using namespace obslab;

TEST_CASE("constant-coefficient stencil on L=1, N=3 is tridiag(-16, 32, -16)") {
  Grid1D grid{1.0, 3};
  EllipticOperator op = build_elliptic(grid, CoefficientField::constant(1.0));
  for (int i = 0; i < 3; ++i) CHECK(op.diagonal()[i] == doctest::Approx(32.0).epsilon(1e-15));
  for (int i = 0; i < 2; ++i) CHECK(op.off_diagonal()[i] == doctest::Approx(-16.0).epsilon(1e-15));
}

TEST_CASE("N=3 eigenvalues match the Toeplitz closed form and a dense eigensolve") {
  Grid1D grid{1.0, 3};
  EllipticOperator op = build_elliptic(grid, CoefficientField::constant(1.0));
  ModeBasis basis = eigendecompose(op, 3);

  const double s2 = std::sqrt(2.0);
  const double expected[3] = {32.0 - 16.0 * s2, 32.0, 32.0 + 16.0 * s2};
  for (int j = 0; j < 3; ++j)
    CHECK(basis.eigenvalues[j] == doctest::Approx(expected[j]).epsilon(1e-12));

  // oracle: dense 3x3 eigensolve, independent of the tridiagonal path
  Eigen::Matrix3d dense;
  dense << 32, -16, 0, -16, 32, -16, 0, -16, 32;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(dense);
  for (int j = 0; j < 3; ++j)
    CHECK(basis.eigenvalues[j] == doctest::Approx(es.eigenvalues()[j]).epsilon(1e-12));
}

TEST_CASE("non-positive coefficient is rejected") {
  Grid1D grid{1.0, 3};
  CHECK_THROWS_WITH_AS(build_elliptic(grid, CoefficientField::constant(0.0)),
                       doctest::Contains("NonPositiveCoefficient"), Error);
  CHECK_THROWS_AS(build_elliptic(grid, CoefficientField::piecewise({0.5}, {1.0, -2.0})),
                  Error);
}

TEST_CASE("discrete Dirichlet Laplacian spectrum matches the analytic stencil eigenvalues") {
  Grid1D grid{1.0, 99};
  const double h = grid.h();
  EllipticOperator op = build_elliptic(grid, CoefficientField::constant(1.0));
  ModeBasis basis = eigendecompose(op, 40);
  for (int j = 1; j <= 40; ++j) {
    const double exact =
        4.0 / (h * h) * std::pow(std::sin(j * std::numbers::pi * h / 2.0), 2);
    CHECK(std::abs(basis.eigenvalues[j - 1] - exact) <= 1e-10 * exact);
  }
}

TEST_CASE("full decomposition reproduces the trace") {
  Grid1D grid{1.0, 40};
  EllipticOperator op =
      build_elliptic(grid, CoefficientField::piecewise({0.3, 0.7}, {1.0, 2.5, 0.5}));
  ModeBasis basis = eigendecompose(op, 40);
  CHECK(basis.eigenvalues.sum() ==
        doctest::Approx(op.trace()).epsilon(1e-8));
}

TEST_CASE("modes are discrete-L2 orthonormal with the spec sign convention") {
  Grid1D grid{1.0, 64};
  EllipticOperator op = build_elliptic(grid, CoefficientField::constant(2.0));
  ModeBasis basis = eigendecompose(op, 20);
  const double h = grid.h();
  for (int j = 0; j < 20; ++j) {
    CHECK(basis.modes(0, j) > 0.0);
    for (int k = 0; k < 20; ++k) {
      const double ip = h * basis.modes.col(j).dot(basis.modes.col(k));
      CHECK(std::abs(ip - (j == k ? 1.0 : 0.0)) <= 1e-10);
    }
  }
  // eigen residual contract
  for (int j = 0; j < 20; ++j) {
    Eigen::VectorXd r = op.apply(basis.modes.col(j)) - basis.eigenvalues[j] * basis.modes.col(j);
    CHECK(std::sqrt(h * r.squaredNorm()) <= 1e-10 * basis.eigenvalues[19]);
  }
}

TEST_CASE("second-order consistency for smooth data") {
  // c = 1, u = sin(pi x): A u should approach pi^2 u at order >= 1.9
  double errs[3];
  double hs[3];
  const int ns[3] = {50, 100, 200};
  for (int k = 0; k < 3; ++k) {
    Grid1D grid{1.0, ns[k]};
    EllipticOperator op = build_elliptic(grid, CoefficientField::constant(1.0));
    Eigen::VectorXd u(ns[k]);
    for (int i = 0; i < ns[k]; ++i) u[i] = std::sin(std::numbers::pi * grid.node(i + 1));
    Eigen::VectorXd r = op.apply(u) - std::numbers::pi * std::numbers::pi * u;
    errs[k] = r.cwiseAbs().maxCoeff();
    hs[k] = grid.h();
  }
  for (int k = 0; k + 1 < 3; ++k) {
    const double order = std::log(errs[k] / errs[k + 1]) / std::log(hs[k] / hs[k + 1]);
    CHECK(order >= 1.9);
  }
}

TEST_CASE("coefficient field representations evaluate as documented") {
  CoefficientField pw = CoefficientField::piecewise({0.5}, {1.0, 4.0});
  CHECK(pw.eval(0.25, 1.0) == 1.0);
  CHECK(pw.eval(0.75, 1.0) == 4.0);
  CHECK(pw.eval(0.5, 1.0) == 4.0);  // right-continuous at breaks
  CHECK(pw.min_value() == 1.0);
  CHECK(pw.max_value() == 4.0);

  CoefficientField smp = CoefficientField::samples({1.0, 2.0, 3.0});
  CHECK(smp.eval(0.0, 1.0) == 1.0);
  CHECK(smp.eval(0.25, 1.0) == doctest::Approx(1.5));
  CHECK(smp.eval(1.0, 1.0) == 3.0);
}

TEST_CASE("mode count outside 1..N is rejected") {
  Grid1D grid{1.0, 8};
  EllipticOperator op = build_elliptic(grid, CoefficientField::constant(1.0));
  CHECK_THROWS_AS(eigendecompose(op, 0), Error);
  CHECK_THROWS_AS(eigendecompose(op, 9), Error);
}
