#include "scenario.hpp"

#include <cmath>
#include <numbers>

namespace obslab {

int default_cutoff(int n_interior) {
  return std::max(1, std::min(60, n_interior / 4));
}

namespace {

void check_alignment(double value, double h, const char* key) {
  const double q = value / h;
  if (std::abs(q - std::lround(q)) > 1e-9 * std::max(1.0, std::abs(q)))
    throw_validation("AlignmentError",
                     std::string(key) + " is not aligned with the grid");
}

double modal_rate(const EvolutionSpec& spec, double lambda_eff) {
  return std::pow(lambda_eff, 1.0 / spec.order);
}

}  // namespace

CompiledScenario compile(const Scenario& scenario) {
  CompiledScenario cs;
  cs.scenario = scenario;
  Scenario& sc = cs.scenario;

  sc.grid.validate();
  const double L = sc.grid.length;
  const double h = sc.grid.h();

  if (!(sc.window.T > 0.0))
    throw_validation("InvalidArgument", "window.T must be positive");
  if (!(sc.window.a >= 0.0 && sc.window.b <= L && sc.window.a < sc.window.b))
    throw_validation("InvalidArgument", "window must satisfy 0 <= a < b <= L");
  check_alignment(sc.window.a, h, "window.a");
  check_alignment(sc.window.b, h, "window.b");

  if (sc.components.empty())
    throw_validation("InvalidArgument", "scenario needs at least one component");
  for (const ComponentSpec& c : sc.components) c.evo.validate();

  const bool linked = sc.coupling.mode == CouplingMode::LinkedIdentity ||
                      sc.coupling.mode == CouplingMode::LinkedOperator;
  if (linked && sc.components.size() >= 2 && sc.components[0].weight == 0.0)
    throw_validation("InvalidArgument", "theta_1 must be nonzero in averaged mode");
  if (linked && sc.components.size() > 2) {
    // superposition semantics: positive averaging sequence summing to 1
    double sum = 0.0;
    for (const ComponentSpec& c : sc.components) {
      if (!(c.weight > 0.0))
        throw_validation("SequenceNotAveraging", "superposition weights must be positive");
      sum += c.weight;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw_validation("SequenceNotAveraging", "superposition weights must sum to 1");
  }
  if (sc.coupling.mode == CouplingMode::LinkedOperator && sc.components.size() != 2)
    throw_validation("InvalidArgument", "LinkedOperator coupling expects two components");
  if (sc.coupling.mode == CouplingMode::Cone) {
    if (sc.components.size() != 2)
      throw_validation("InvalidArgument", "Cone coupling expects two components");
    const double ratio = sc.components[0].weight / sc.components[1].weight;
    if (std::abs(sc.coupling.cone_constant - ratio) <= 1e-12 * (1.0 + std::abs(ratio)))
      throw_validation("SchemaError", "coupling.c: cone constant must differ from theta1/theta2");
  }

  if (sc.cutoff == 0) sc.cutoff = default_cutoff(sc.grid.n_interior);
  if (sc.cutoff < 1 || sc.cutoff > sc.grid.n_interior)
    throw_validation("InvalidArgument", "cutoff must satisfy 1 <= M <= N");
  const int M = sc.cutoff;

  cs.op_primary = build_elliptic(sc.grid, sc.coeff_primary);
  cs.bases.push_back(eigendecompose(cs.op_primary, M));
  cs.ops.push_back(cs.op_primary);

  cs.component_basis.resize(sc.components.size());
  cs.lambda_eff.resize(sc.components.size());
  for (std::size_t i = 0; i < sc.components.size(); ++i) {
    const EvolutionSpec& evo = sc.components[i].evo;
    switch (evo.scale_mode) {
      case ScaleMode::SharedScalar:
        cs.component_basis[i] = 0;
        cs.lambda_eff[i] = evo.scale * cs.bases[0].eigenvalues;
        break;
      case ScaleMode::DistinctOperator: {
        EllipticOperator op = build_elliptic(sc.grid, evo.own_coeff);
        cs.ops.push_back(op);
        cs.bases.push_back(eigendecompose(op, M));
        cs.component_basis[i] = static_cast<int>(cs.bases.size()) - 1;
        cs.lambda_eff[i] = cs.bases.back().eigenvalues;
        break;
      }
      case ScaleMode::SharedField: {
        if (evo.order > 2)
          throw_validation("UnsupportedOrder",
                           "variable multiplier fields support order k <= 2 only");
        if (!(evo.own_coeff.min_value() > 0.0))
          throw_validation("NonPositiveCoefficient", "multiplier field must be positive");
        cs.component_basis[i] = 0;
        // stiffest effective rate bound used for sampling / stepping rules
        cs.lambda_eff[i] = evo.own_coeff.max_value() * cs.bases[0].eigenvalues;
        break;
      }
    }
  }

  // time sampling: >= 8 samples per period of the fastest retained modal rate
  int nt = sc.window.nt;
  if (nt == 0) {
    double rate_max = 0.0;
    for (std::size_t i = 0; i < sc.components.size(); ++i)
      rate_max = std::max(rate_max, modal_rate(sc.components[i].evo, cs.lambda_eff[i][M - 1]));
    const double periods = sc.window.T * rate_max / (2.0 * std::numbers::pi);
    nt = 8 * std::max(1, static_cast<int>(std::ceil(periods))) + 1;
  }
  if (nt < 3 || nt % 2 == 0)
    throw_validation("InvalidArgument", "window.nt must be odd and >= 3");
  cs.nt = nt;
  sc.window.nt = nt;
  const double dt = sc.window.T / (nt - 1);
  cs.times.resize(nt);
  for (int t = 0; t < nt; ++t) cs.times[t] = t * dt;
  cs.time_weights = simpson_weights(nt, dt);

  const int ia = static_cast<int>(std::lround(sc.window.a / h));
  const int ib = static_cast<int>(std::lround(sc.window.b / h));
  for (int i = ia + 1; i <= ib - 1; ++i)
    if (i >= 1 && i <= sc.grid.n_interior) cs.window_nodes.push_back(i - 1);
  if (cs.window_nodes.empty())
    throw_validation("InvalidArgument", "observation window contains no interior nodes");

  for (const ModeBasis& basis : cs.bases) {
    Eigen::MatrixXd phi(cs.window_nodes.size(), M);
    for (std::size_t r = 0; r < cs.window_nodes.size(); ++r)
      phi.row(r) = basis.modes.row(cs.window_nodes[r]);
    cs.phi_window.push_back(std::move(phi));
  }

  if (sc.coupling.mode == CouplingMode::LinkedOperator) {
    if (sc.coupling.linked_ops.empty())
      throw_validation("SchemaError", "coupling.matrix_path: LinkedOperator needs a matrix");
    for (const Eigen::MatrixXcd& r : sc.coupling.linked_ops)
      if (r.rows() != M || r.cols() != M)
        throw_validation("InvalidArgument", "linked operator must be cutoff x cutoff");
    // vanishing implication: theta1*Phi1 + theta2*Phi2*R must be injective on omega
    const double t1 = sc.components[0].weight, t2 = sc.components[1].weight;
    const Eigen::MatrixXd& phi1 = cs.phi_window[0];
    const Eigen::MatrixXd& phi2 = cs.phi_window[cs.component_basis[1]];
    for (const Eigen::MatrixXcd& r : sc.coupling.linked_ops) {
      Eigen::MatrixXcd s = t1 * phi1.cast<cplx>() + t2 * (phi2.cast<cplx>() * r);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s);
      const Eigen::VectorXd& sv = svd.singularValues();
      if (sv[sv.size() - 1] <= 1e-10 * sv[0])
        throw_validation("CouplingSingular",
                         "theta1 I + theta2 R annihilates data on the window");
    }
  }

  return cs;
}

FreeLayout free_layout(const CompiledScenario& cs) {
  FreeLayout layout;
  layout.modes = cs.cutoff();
  const bool linked = cs.scenario.coupling.mode == CouplingMode::LinkedIdentity ||
                      cs.scenario.coupling.mode == CouplingMode::LinkedOperator;
  if (linked) {
    for (int s = 0; s < cs.scenario.components[0].evo.order; ++s)
      layout.blocks.push_back({0, s});
  } else {
    for (int i = 0; i < cs.n_components(); ++i)
      for (int s = 0; s < cs.scenario.components[i].evo.order; ++s)
        layout.blocks.push_back({i, s});
  }
  return layout;
}

InitialData couple_data(const CompiledScenario& cs, const Eigen::VectorXcd& free) {
  const FreeLayout layout = free_layout(cs);
  if (free.size() != layout.dim())
    throw_validation("CutoffMismatch", "free data vector has the wrong dimension");
  const int M = cs.cutoff();

  auto slot_of = [&](int block) { return free.segment(layout.offset(block), M); };

  InitialData data;
  data.components.resize(cs.n_components());
  const bool linked = cs.scenario.coupling.mode == CouplingMode::LinkedIdentity ||
                      cs.scenario.coupling.mode == CouplingMode::LinkedOperator;
  for (int i = 0; i < cs.n_components(); ++i) {
    const int k = cs.scenario.components[i].evo.order;
    Eigen::MatrixXcd jets = Eigen::MatrixXcd::Zero(M, k);
    for (int s = 0; s < k; ++s) {
      if (linked && i > 0) {
        const int b = layout.find(0, s);
        if (b < 0) continue;  // no matching primary slot: slot stays zero
        if (cs.scenario.coupling.mode == CouplingMode::LinkedIdentity) {
          jets.col(s) = slot_of(b);
        } else {
          const auto& rs = cs.scenario.coupling.linked_ops;
          const Eigen::MatrixXcd& r = rs[std::min<std::size_t>(s, rs.size() - 1)];
          jets.col(s) = r * slot_of(b);
        }
      } else {
        const int b = layout.find(i, s);
        if (b >= 0) jets.col(s) = slot_of(b);
      }
    }
    data.components[i].slots = std::move(jets);
  }
  return data;
}

Eigen::MatrixXcd modal_state_at(const CompiledScenario& cs, int component,
                                const Eigen::MatrixXcd& jets, double t) {
  const EvolutionSpec& evo = cs.scenario.components[component].evo;
  const int M = cs.cutoff();
  const int k = evo.order;
  if (jets.rows() != M || jets.cols() != k)
    throw_validation("CutoffMismatch", "jet matrix shape does not match cutoff/order");
  Eigen::MatrixXcd out(M, k);
  for (int j = 0; j < M; ++j) {
    Eigen::MatrixXcd p = modal_propagator(evo, cs.lambda_eff[component][j], t);
    out.row(j) = (p * jets.row(j).transpose()).transpose();
  }
  return out;
}

std::vector<SpaceTimeField> solve(const CompiledScenario& cs, const InitialData& data) {
  if (static_cast<int>(data.components.size()) != cs.n_components())
    throw_validation("CutoffMismatch", "initial data must cover every component");
  const int M = cs.cutoff();
  const int nt = cs.nt;
  const int nx = cs.nx();

  std::vector<SpaceTimeField> fields;
  fields.reserve(cs.n_components());

  for (int i = 0; i < cs.n_components(); ++i) {
    const EvolutionSpec& evo = cs.scenario.components[i].evo;
    const int k = evo.order;
    const Eigen::MatrixXcd& jets = data.components[i].slots;
    if (jets.rows() != M || jets.cols() != k)
      throw_validation("CutoffMismatch", "initial data shape does not match cutoff/order");

    if (evo.scale_mode == ScaleMode::SharedField) {
      const double lam_max = cs.lambda_eff[i][M - 1];
      const double dt_max = 0.1 / std::pow(lam_max, 1.0 / k);
      ComponentData cd{jets};
      fields.push_back(timestep_scaled(cs.op_primary, cs.bases[0], evo.own_coeff, k, cd,
                                       cs.scenario.window, nt, dt_max));
      continue;
    }

    std::vector<ModalPositionRow> rows;
    rows.reserve(M);
    for (int j = 0; j < M; ++j) rows.emplace_back(evo, cs.lambda_eff[i][j]);

    Eigen::MatrixXcd coeffs(nt, M);
    std::vector<cplx> row(k);
    for (int t = 0; t < nt; ++t)
      for (int j = 0; j < M; ++j) {
        rows[j].eval(cs.times[t], row.data());
        cplx acc(0.0, 0.0);
        for (int s = 0; s < k; ++s) acc += row[s] * jets(j, s);
        coeffs(t, j) = acc;
      }

    SpaceTimeField f;
    f.times = cs.times;
    f.time_weights = cs.time_weights;
    f.node_indices = cs.window_nodes;
    f.h = cs.scenario.grid.h();
    f.node_x.resize(nx);
    for (int r = 0; r < nx; ++r)
      f.node_x[r] = cs.scenario.grid.node(cs.window_nodes[r] + 1);
    const Eigen::MatrixXd& phi = cs.phi_window[cs.component_basis[i]];
    f.values = coeffs * phi.transpose().cast<cplx>();
    fields.push_back(std::move(f));
  }
  return fields;
}

SpaceTimeField observation_field(const CompiledScenario& cs,
                                 const std::vector<SpaceTimeField>& fields) {
  SpaceTimeField obs = fields[0];
  obs.values = cs.theta(0) * fields[0].values;
  for (std::size_t i = 1; i < fields.size(); ++i)
    obs.values += cs.theta(static_cast<int>(i)) * fields[i].values;
  return obs;
}

PrincipalSymbol symbol_of(const Scenario& scenario, int component) {
  const EvolutionSpec& evo = scenario.components[component].evo;
  PrincipalSymbol p;
  p.kind = evo.kind;
  p.order = evo.order;
  p.domain_length = scenario.grid.length;
  switch (evo.scale_mode) {
    case ScaleMode::SharedScalar:
      p.scale = evo.scale;
      p.base = scenario.coeff_primary;
      break;
    case ScaleMode::DistinctOperator:
      p.scale = 1.0;
      p.base = evo.own_coeff;
      break;
    case ScaleMode::SharedField:
      p.scale = 1.0;
      p.base = scenario.coeff_primary;
      p.modifier = evo.own_coeff;
      break;
  }
  return p;
}

}  // namespace obslab
