#include "observability.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <random>

namespace obslab {

namespace {

constexpr int kDimensionGuard = 2000;
constexpr double kCObsNoiseFloor = 1e-12;  // sigma_min below this (rel sigma_max) -> C_obs = inf
constexpr double kGrowthWarnFactor = 1e6;

int basis_of_block(const CompiledScenario& cs, const FreeLayout::Block& b) {
  return cs.component_basis[b.component];
}

Eigen::VectorXd slot_weights(const CompiledScenario& cs, const FreeLayout& layout,
                             int extra_power) {
  const int M = layout.modes;
  Eigen::VectorXd w(layout.dim());
  for (std::size_t b = 0; b < layout.blocks.size(); ++b) {
    const auto& blk = layout.blocks[b];
    const Eigen::VectorXd& lam = cs.bases[basis_of_block(cs, blk)].eigenvalues;
    for (int j = 0; j < M; ++j)
      w[static_cast<int>(b) * M + j] =
          std::pow(lam[j], -static_cast<double>(blk.slot + extra_power));
  }
  return w;
}

struct JetRef {
  enum class Kind { Zero, Selector, Matrix } kind = Kind::Zero;
  int block = -1;
  const Eigen::MatrixXcd* op = nullptr;
};

JetRef jet_of(const CompiledScenario& cs, const FreeLayout& layout, int component, int slot) {
  const bool linked = cs.scenario.coupling.mode == CouplingMode::LinkedIdentity ||
                      cs.scenario.coupling.mode == CouplingMode::LinkedOperator;
  if (linked && component > 0) {
    const int b = layout.find(0, slot);
    if (b < 0) return {};
    if (cs.scenario.coupling.mode == CouplingMode::LinkedIdentity)
      return {JetRef::Kind::Selector, b, nullptr};
    const auto& rs = cs.scenario.coupling.linked_ops;
    const Eigen::MatrixXcd* r = &rs[std::min<std::size_t>(slot, rs.size() - 1)];
    return {JetRef::Kind::Matrix, b, r};
  }
  const int b = layout.find(component, slot);
  if (b < 0) return {};
  return {JetRef::Kind::Selector, b, nullptr};
}

}  // namespace

Eigen::VectorXd energy_weights(const CompiledScenario& cs, const FreeLayout& layout) {
  return slot_weights(cs, layout, 0);
}

Eigen::VectorXd compact_weights(const CompiledScenario& cs, const FreeLayout& layout) {
  return slot_weights(cs, layout, 1);
}

Gramian assemble_gramian(const CompiledScenario& cs) {
  for (const ComponentSpec& c : cs.scenario.components)
    if (c.evo.scale_mode == ScaleMode::SharedField)
      throw_validation("InvalidArgument",
                       "Gramian assembly requires the spectral path "
                       "(scalar scale or distinct elliptic operator)");

  const FreeLayout layout = free_layout(cs);
  const int M = layout.modes;
  const int P = layout.dim();
  if (P > kDimensionGuard)
    throw_validation("DimensionGuard", "free data dimension exceeds the desk-scale guard");

  const int nt = cs.nt;
  const int nc = cs.n_components();

  // modal position tables: tables[i][s](j, t) = coefficient of jet slot s in y_j(t)
  bool growth = false;
  std::vector<std::vector<Eigen::MatrixXcd>> tables(nc);
  for (int i = 0; i < nc; ++i) {
    const EvolutionSpec& evo = cs.scenario.components[i].evo;
    const int k = evo.order;
    tables[i].assign(k, Eigen::MatrixXcd(M, nt));
    std::vector<cplx> row(k);
    for (int j = 0; j < M; ++j) {
      ModalPositionRow pos(evo, cs.lambda_eff[i][j]);
      for (int t = 0; t < nt; ++t) {
        pos.eval(cs.times[t], row.data());
        for (int s = 0; s < k; ++s) {
          tables[i][s](j, t) = row[s];
          if (std::abs(row[s]) > kGrowthWarnFactor) growth = true;
        }
      }
    }
  }

  // spatial cross grams per basis pair
  std::map<std::pair<int, int>, Eigen::MatrixXd> xcache;
  auto spatial_gram = [&](int ba, int bb) -> const Eigen::MatrixXd& {
    auto key = std::make_pair(ba, bb);
    auto it = xcache.find(key);
    if (it == xcache.end()) {
      Eigen::MatrixXd x =
          cs.phi_window[ba].transpose() * cs.phi_window[bb] * cs.scenario.grid.h();
      it = xcache.emplace(key, std::move(x)).first;
    }
    return it->second;
  };

  // Aggregate theta-weighted position tables per (basis, free block). Components
  // that share a basis and feed from the same free slot fold elementwise, so
  // exact weight cancellations (theta_1 + theta_2 = 0 on identical components)
  // produce an exactly zero table.
  struct Term {
    int basis, block;
    const Eigen::MatrixXcd* op;  // null: plain selector group
    Eigen::MatrixXcd table;      // theta-weighted, M x nt
  };
  std::vector<Term> terms;
  auto selector_term = [&](int basis, int block) -> Term& {
    for (Term& t : terms)
      if (!t.op && t.basis == basis && t.block == block) return t;
    terms.push_back({basis, block, nullptr, Eigen::MatrixXcd::Zero(M, nt)});
    return terms.back();
  };
  for (int i = 0; i < nc; ++i) {
    const int basis = cs.component_basis[i];
    for (int s = 0; s < cs.scenario.components[i].evo.order; ++s) {
      JetRef jet = jet_of(cs, layout, i, s);
      if (jet.kind == JetRef::Kind::Zero) continue;
      if (jet.kind == JetRef::Kind::Selector) {
        selector_term(basis, jet.block).table += cs.theta(i) * tables[i][s];
      } else {
        terms.push_back({basis, jet.block, jet.op, cs.theta(i) * tables[i][s]});
      }
    }
  }

  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(P, P);
  auto place = [&](const Term& ta, const Term& tb, const Eigen::MatrixXcd& mb) {
    auto block = g.block(ta.block * M, tb.block * M, M, M);
    if (!ta.op && !tb.op)
      block += mb;
    else if (!ta.op)
      block += mb * (*tb.op);
    else if (!tb.op)
      block += ta.op->adjoint() * mb;
    else
      block += ta.op->adjoint() * mb * (*tb.op);
  };

  const Eigen::VectorXd& w = cs.time_weights;
  for (std::size_t a = 0; a < terms.size(); ++a) {
    for (std::size_t b = a; b < terms.size(); ++b) {
      Eigen::MatrixXcd t =
          terms[a].table.conjugate() * w.asDiagonal() * terms[b].table.transpose();
      const Eigen::MatrixXd& x = spatial_gram(terms[a].basis, terms[b].basis);
      Eigen::MatrixXcd mb = x.cast<cplx>().cwiseProduct(t);
      place(terms[a], terms[b], mb);
      if (a != b) place(terms[b], terms[a], mb.adjoint());
    }
  }

  Gramian gram;
  gram.herm_residual = (g - g.adjoint()).cwiseAbs().maxCoeff();
  gram.g = 0.5 * (g + g.adjoint());
  gram.layout = layout;
  gram.energy = energy_weights(cs, layout);
  gram.compact = compact_weights(cs, layout);
  gram.compact_on = cs.scenario.compact_terms;
  gram.growth_warning = growth;
  gram.coords.reserve(P);
  for (const auto& blk : layout.blocks)
    for (int j = 0; j < M; ++j) gram.coords.push_back({blk.component, blk.slot, j});
  return gram;
}

namespace {

struct SubProblem {
  std::vector<int> indices;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
  Eigen::VectorXd dinv_sqrt;
};

SubProblem solve_normalized(const Gramian& gram, int m0) {
  SubProblem sp;
  for (int i = 0; i < gram.dim(); ++i)
    if (gram.coords[i].mode + 1 >= m0) sp.indices.push_back(i);
  if (sp.indices.empty())
    throw_validation("InvalidArgument", "mode range m0..M is empty");

  const int n = static_cast<int>(sp.indices.size());
  sp.dinv_sqrt.resize(n);
  for (int i = 0; i < n; ++i) {
    const double e = gram.energy[sp.indices[i]];
    if (!(e > 0.0)) throw_numeric("EnergyNotPD", "energy form is not positive definite");
    sp.dinv_sqrt[i] = 1.0 / std::sqrt(e);
  }

  Eigen::MatrixXcd w(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      w(r, c) = gram.g(sp.indices[r], sp.indices[c]) * sp.dinv_sqrt[r] * sp.dinv_sqrt[c];
  if (gram.compact_on)
    for (int r = 0; r < n; ++r)
      w(r, r) += gram.compact[sp.indices[r]] * sp.dinv_sqrt[r] * sp.dinv_sqrt[r];
  w = 0.5 * (w + w.adjoint()).eval();

  sp.solver.compute(w);
  if (sp.solver.info() != Eigen::Success)
    throw_numeric("ConvergenceFailure", "Hermitian eigensolver did not converge");
  return sp;
}

void normalize_phase(Eigen::VectorXcd& v) {
  int imax = 0;
  double best = -1.0;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      imax = i;
    }
  if (best > 0.0) v *= std::conj(v[imax]) / std::abs(v[imax]);
  const double n = v.norm();
  if (n > 0.0) v /= n;
}

double c_obs_of(double sigma_min, double sigma_max) {
  if (!(sigma_min > kCObsNoiseFloor * std::max(sigma_max, 0.0)) || sigma_min <= 0.0)
    return std::numeric_limits<double>::infinity();
  return 1.0 / sigma_min;
}

}  // namespace

ObservabilityReport observability_constants(const Gramian& gram, int m0) {
  SubProblem sp = solve_normalized(gram, m0);
  const auto& ev = sp.solver.eigenvalues();
  const int n = static_cast<int>(sp.indices.size());

  ObservabilityReport rep;
  rep.sigma_min = ev[0];
  rep.sigma_max = ev[n - 1];
  rep.c_obs = c_obs_of(rep.sigma_min, rep.sigma_max);
  rep.m0 = m0;
  rep.cutoff = gram.layout.modes;
  rep.dim = n;
  rep.compact_on = gram.compact_on;
  rep.growth_warning = gram.growth_warning;

  rep.extremal = Eigen::VectorXcd::Zero(gram.dim());
  Eigen::VectorXcd w0 = sp.solver.eigenvectors().col(0);
  for (int i = 0; i < n; ++i) rep.extremal[sp.indices[i]] = sp.dinv_sqrt[i] * w0[i];
  normalize_phase(rep.extremal);
  return rep;
}

std::vector<SweepRow> weak_constant_sweep(const Gramian& gram, int m0_lo, int m0_hi) {
  if (m0_lo < 1 || m0_hi < m0_lo)
    throw_validation("InvalidArgument", "invalid m0 range");
  if (gram.layout.modes < m0_hi + 5)
    throw_validation("InvalidArgument", "cutoff must exceed the largest m0 by at least 5");
  std::vector<SweepRow> rows;
  for (int m0 = m0_lo; m0 <= m0_hi; ++m0) {
    ObservabilityReport r = observability_constants(gram, m0);
    rows.push_back({m0, r.sigma_min, r.c_obs});
  }
  return rows;
}

ObservabilityReport simultaneous_constants(const CompiledScenario& cs) {
  if (cs.scenario.coupling.mode != CouplingMode::Independent)
    throw_validation("InvalidArgument", "simultaneous constants require Independent coupling");
  return observability_constants(assemble_gramian(cs), 1);
}

KernelScanResult kernel_scan(const CompiledScenario& cs, double tol, double delta) {
  if (cs.scenario.coupling.mode != CouplingMode::Independent)
    throw_validation("InvalidArgument", "kernel scan requires Independent coupling");
  Gramian gram = assemble_gramian(cs);
  SubProblem sp = solve_normalized(gram, 1);
  const auto& ev = sp.solver.eigenvalues();
  const int n = static_cast<int>(sp.indices.size());
  const int M = gram.layout.modes;

  KernelScanResult res;
  res.tol = tol;
  res.sigma_max = ev[n - 1];
  const double thresh = tol * std::max(res.sigma_max, 0.0);

  for (int q = 0; q < n && ev[q] <= thresh; ++q) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(gram.dim());
    for (int i = 0; i < n; ++i) v[sp.indices[i]] = sp.dinv_sqrt[i] * sp.solver.eigenvectors()(i, q);
    // v has unit energy: w unit, v = E^{-1/2} w
    Eigen::VectorXcd r = Eigen::VectorXcd::Zero(cs.nx());
    for (int i = 0; i < cs.n_components(); ++i) {
      const int b = gram.layout.find(i, 0);
      if (b < 0) continue;
      r += cs.theta(i) *
           (cs.phi_window[cs.component_basis[i]].cast<cplx>() * v.segment(b * M, M));
    }
    KernelElement el;
    el.sigma = ev[q];
    el.residual_l2_omega = std::sqrt(cs.scenario.grid.h() * r.squaredNorm());
    el.data = std::move(v);
    res.near_kernel.push_back(std::move(el));
  }

  const double h = cs.scenario.grid.h();
  for (int i = 1; i < cs.n_components(); ++i) {
    KernelScanResult::ComponentCriterion crit;
    crit.component = i;
    crit.delta = delta;
    const int k = cs.scenario.components[i].evo.order;
    const Eigen::VectorXd& lam1 = cs.lambda_eff[0];
    const Eigen::VectorXd& lam2 = cs.lambda_eff[i];
    for (int j = 0; j < M; ++j) {
      const double pow1 = std::pow(lam1[j], 0.5 * k);
      for (int l = 0; l < M; ++l) {
        if (std::abs(pow1 - lam2[l]) > delta) continue;
        Eigen::VectorXd combo = cs.theta(0) * cs.phi_window[cs.component_basis[0]].col(j) +
                                cs.theta(i) * cs.phi_window[cs.component_basis[i]].col(l);
        EigenMatch m;
        m.mode_primary = j + 1;
        m.mode_secondary = l + 1;
        m.lambda_pow = pow1;
        m.lambda_2 = lam2[l];
        m.combo_norm = std::sqrt(h * combo.squaredNorm());
        crit.matches.push_back(m);
      }
    }
    if (!crit.matches.empty()) {
      double mn = crit.matches[0].combo_norm;
      for (const EigenMatch& m : crit.matches) mn = std::min(mn, m.combo_norm);
      crit.min_combo_norm = mn;
    }
    res.criteria.push_back(std::move(crit));
  }
  return res;
}

namespace {

CompiledScenario truncated_copy(const CompiledScenario& cs, int count,
                                const std::vector<double>& weights) {
  CompiledScenario out = cs;
  out.scenario.components.resize(count);
  out.component_basis.resize(count);
  out.lambda_eff.resize(count);
  for (int i = 0; i < count; ++i) out.scenario.components[i].weight = weights[i];
  return out;
}

CompiledScenario single_component_copy(const CompiledScenario& cs, int component) {
  CompiledScenario out = cs;
  out.scenario.components = {cs.scenario.components[component]};
  out.scenario.components[0].weight = 1.0;
  out.scenario.coupling = DataCoupling{};
  out.component_basis = {cs.component_basis[component]};
  out.lambda_eff = {cs.lambda_eff[component]};
  return out;
}

}  // namespace

SuperpositionResult superposition_constants(const CompiledScenario& cs,
                                            const std::vector<int>& truncations,
                                            const std::vector<std::vector<double>>& families) {
  const bool linked = cs.scenario.coupling.mode == CouplingMode::LinkedIdentity;
  if (!linked)
    throw_validation("InvalidArgument", "superposition requires LinkedIdentity coupling");
  const int nc = cs.n_components();
  if (nc > 32) throw_validation("DimensionGuard", "superposition is limited to 32 components");

  for (const auto& th : families) {
    if (static_cast<int>(th.size()) != nc)
      throw_validation("SequenceNotAveraging", "theta family must cover every component");
    double sum = 0.0;
    for (double v : th) {
      if (!(v > 0.0))
        throw_validation("SequenceNotAveraging", "theta values must be positive");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw_validation("SequenceNotAveraging", "theta family must sum to 1");
  }

  SuperpositionResult res;
  for (std::size_t f = 0; f < families.size(); ++f) {
    for (int trunc : truncations) {
      if (trunc < 1 || trunc > nc)
        throw_validation("InvalidArgument", "truncation outside component range");
      // renormalize the truncated prefix so every run uses a proper averaging
      // sequence (positive weights summing to 1)
      std::vector<double> weights(families[f].begin(), families[f].begin() + trunc);
      double partial = 0.0;
      for (double v : weights) partial += v;
      for (double& v : weights) v /= partial;
      CompiledScenario sub = truncated_copy(cs, trunc, weights);
      ObservabilityReport rep = observability_constants(assemble_gramian(sub), 1);
      res.rows.push_back({static_cast<int>(f), trunc, weights[0], rep.sigma_min, rep.c_obs});
    }
  }

  // uniform-domination check: per component, L2(window) norm per unit energy
  for (int i = 0; i < nc; ++i) {
    CompiledScenario single = single_component_copy(cs, i);
    ObservabilityReport rep = observability_constants(assemble_gramian(single), 1);
    res.component_bound.push_back(std::sqrt(std::max(0.0, rep.sigma_max)));
  }
  return res;
}

ConeCheck cone_check(const CompiledScenario& cs, const Eigen::VectorXcd& free) {
  if (cs.scenario.coupling.mode != CouplingMode::Cone)
    throw_validation("InvalidArgument", "cone check requires Cone coupling");
  InitialData data = couple_data(cs, free);
  const double h = cs.scenario.grid.h();
  auto omega_norm = [&](int comp) {
    Eigen::VectorXcd u = cs.phi_window[cs.component_basis[comp]].cast<cplx>() *
                         data.components[comp].slots.col(0);
    return std::sqrt(h * u.squaredNorm());
  };
  ConeCheck c;
  c.norm_primary = omega_norm(0);
  c.norm_secondary = omega_norm(1);
  c.feasible = c.norm_secondary <= cs.scenario.coupling.cone_constant * c.norm_primary;
  return c;
}

double direct_observation_energy(const CompiledScenario& cs, const Eigen::VectorXcd& free) {
  InitialData data = couple_data(cs, free);
  std::vector<SpaceTimeField> fields = solve(cs, data);
  return observation_field(cs, fields).integrate_abs2();
}

std::vector<Eigen::VectorXcd> random_unit_data(const CompiledScenario& cs,
                                               std::uint64_t seed, int count) {
  const FreeLayout layout = free_layout(cs);
  const Eigen::VectorXd energy = energy_weights(cs, layout);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Eigen::VectorXcd> out;
  out.reserve(count);
  for (int n = 0; n < count; ++n) {
    Eigen::VectorXcd v(layout.dim());
    for (std::size_t b = 0; b < layout.blocks.size(); ++b) {
      const bool cplx_block =
          cs.scenario.components[layout.blocks[b].component].evo.complex_field();
      for (int j = 0; j < layout.modes; ++j) {
        const double re = gauss(rng);
        const double im = cplx_block ? gauss(rng) : 0.0;
        v[layout.offset(static_cast<int>(b)) + j] = cplx(re, im);
      }
    }
    const double e = energy.dot(v.cwiseAbs2());
    v /= std::sqrt(e);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace obslab
