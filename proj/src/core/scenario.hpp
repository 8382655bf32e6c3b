#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evolution.hpp"
#include "grid.hpp"
#include "symbols.hpp"

namespace obslab {

enum class CouplingMode { LinkedIdentity, LinkedOperator, Independent, Cone };

/// How the perturbation components' initial data relate to the primary's.
struct DataCoupling {
  CouplingMode mode = CouplingMode::LinkedIdentity;
  double cone_constant = 0.0;
  std::vector<Eigen::MatrixXcd> linked_ops;  // R per data slot; one entry applies to all slots
};

struct ComponentSpec {
  EvolutionSpec evo;
  double weight = 1.0;  // theta_i
};

/// Full experiment description. Component 0 is the primary; its elliptic
/// operator (built from `coeff_primary`) is the shared operator for scaled
/// perturbations.
struct Scenario {
  Grid1D grid;
  CoefficientField coeff_primary;
  ObservationWindow window;
  std::vector<ComponentSpec> components;
  DataCoupling coupling;
  int cutoff = 0;  // 0 -> default min(60, N/4)
  bool compact_terms = false;
  ScalingTag scaling = ScalingTag::Classical;
  std::uint64_t seed = 0;
};

/// Free initial-data coordinate layout for a scenario: one block of M modal
/// coefficients per (component, slot) pair that carries free data.
struct FreeLayout {
  struct Block {
    int component;
    int slot;
  };
  int modes = 0;
  std::vector<Block> blocks;

  int dim() const { return modes * static_cast<int>(blocks.size()); }
  int offset(int block) const { return block * modes; }
  /// block index holding (component, slot), or -1
  int find(int component, int slot) const {
    for (std::size_t b = 0; b < blocks.size(); ++b)
      if (blocks[b].component == component && blocks[b].slot == slot)
        return static_cast<int>(b);
    return -1;
  }
};

/// Scenario with its spectral machinery prepared: operators, mode bases,
/// window nodes, time quadrature.
struct CompiledScenario {
  Scenario scenario;
  EllipticOperator op_primary;
  std::vector<ModeBasis> bases;        // [0] = primary basis
  std::vector<EllipticOperator> ops;   // aligned with bases
  std::vector<int> component_basis;    // index into bases per component
  std::vector<Eigen::VectorXd> lambda_eff;  // per component, size M

  int nt = 0;
  std::vector<double> times;
  Eigen::VectorXd time_weights;
  std::vector<int> window_nodes;       // 0-based interior array indices
  std::vector<Eigen::MatrixXd> phi_window;  // per basis: nx x M

  int n_components() const { return static_cast<int>(scenario.components.size()); }
  int cutoff() const { return scenario.cutoff; }
  int nx() const { return static_cast<int>(window_nodes.size()); }
  double theta(int i) const { return scenario.components[i].weight; }
};

CompiledScenario compile(const Scenario& scenario);

/// Default cutoff rule used when a scenario leaves it unset.
int default_cutoff(int n_interior);

/// The free-data layout induced by the coupling mode.
FreeLayout free_layout(const CompiledScenario& cs);

/// Expand a free-coordinate vector into per-component modal jets.
InitialData couple_data(const CompiledScenario& cs, const Eigen::VectorXcd& free);

/// Modal jets of one component propagated to time t (M x k).
Eigen::MatrixXcd modal_state_at(const CompiledScenario& cs, int component,
                                const Eigen::MatrixXcd& jets, double t);

/// Propagate every component and sample on the observation window.
std::vector<SpaceTimeField> solve(const CompiledScenario& cs, const InitialData& data);

/// Weighted observation field theta_1 u_1 + ... on the window.
SpaceTimeField observation_field(const CompiledScenario& cs,
                                 const std::vector<SpaceTimeField>& fields);

/// Principal symbol of one component under the given scaling geometry.
PrincipalSymbol symbol_of(const Scenario& scenario, int component);

}  // namespace obslab
