#pragma once

#include <optional>
#include <vector>

#include "evolution.hpp"
#include "grid.hpp"

namespace obslab {

/// Dual variables (time frequency tau, space frequency xi), cycles convention.
struct DualPoint {
  double tau = 0.0;
  double xi = 0.0;
};

enum class ScalingTag { Classical, Parabolic };

/// Principal symbol of one evolution operator. The effective spatial
/// coefficient is scale * base(x) * modifier(x) so that scalar multiples and
/// variable multipliers of a shared elliptic part evaluate correctly.
struct PrincipalSymbol {
  EvolutionKind kind = EvolutionKind::Wave;
  int order = 2;
  double scale = 1.0;
  CoefficientField base;               // primary operator coefficient
  std::optional<CoefficientField> modifier;  // variable multiplier, if any
  double domain_length = 1.0;

  double coeff_at(double x) const {
    double c = scale * base.eval(x, domain_length);
    if (modifier) c *= modifier->eval(x, domain_length);
    return c;
  }
};

/// One zero of a principal symbol on the sampled hypersurface.
struct CharPoint {
  double x;
  DualPoint pt;
};

struct SeparationReport {
  double margin = 0.0;            // normalized; +inf when both zero sets are empty
  bool empty1 = false;            // symbol 1 has no sampled zeros
  bool empty2 = false;
  double x_witness = 0.0;         // point achieving the margin
  DualPoint pt_witness;
  ScalingTag scaling = ScalingTag::Classical;
  double max_abs1 = 0.0, max_abs2 = 0.0;
};

/// Point on the sampling hypersurface at parameter phi: the unit sphere
/// (cos, sin) classically, the ellipsoid tau^2 + xi^2/2 = 1 parabolically.
DualPoint hypersurface_point(ScalingTag scaling, double phi);

cplx eval_classical(const PrincipalSymbol& p, double x, const DualPoint& pt);
cplx eval_parabolic(const PrincipalSymbol& p, double x, const DualPoint& pt);
cplx eval_symbol(const PrincipalSymbol& p, double x, const DualPoint& pt, ScalingTag scaling);

/// Projection of a dual point onto the ellipsoid P along meridians of the
/// paraboloids tau = a * xi^2.
DualPoint parabolic_project(const DualPoint& pt);

/// Parabolic gauge |(tau, xi)|_p = ((2 pi tau)^2 + (2 pi xi)^4)^{1/4}.
double parabolic_gauge(const DualPoint& pt);

/// Zeros of the symbol on the hypersurface, refined from an angular scan at
/// each sampled x in [a, b]. Membership threshold: |p| <= 1e-9 * max|p|.
std::vector<CharPoint> sample_characteristic_set(const PrincipalSymbol& p, double a, double b,
                                                 ScalingTag scaling, int n_angle, int n_x,
                                                 double* max_abs = nullptr);

SeparationReport separation_margin(const PrincipalSymbol& p1, const PrincipalSymbol& p2,
                                   double a, double b, ScalingTag scaling,
                                   int n_angle = 720, int n_x = 128);

/// Minimal time after which every bicharacteristic ray x' = +-sqrt(c(x)),
/// reflecting specularly at {0, L}, has entered (a, b). RK4 ray integration.
double gcc_time(const CoefficientField& c, double a, double b, double L, double h);

}  // namespace obslab
