// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Every tolerance is pinned here, in code.

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "core/microlocal.hpp"
#include "core/observability.hpp"
#include "obslab/obslab.h"

using namespace obslab;

namespace {

struct Runner {
  int failures = 0;

  void criterion(int id, const std::string& label, const std::function<void()>& body) {
    try {
      body();
      std::printf("PASS  criterion %2d: %s\n", id, label.c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL  criterion %2d: %s\n      %s\n", id, label.c_str(), e.what());
    }
  }
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

ComponentSpec component(EvolutionKind kind, int k, double weight, double scale) {
  ComponentSpec c;
  c.evo.kind = kind;
  c.evo.order = EvolutionSpec::order_of(kind, k);
  c.evo.scale_mode = ScaleMode::SharedScalar;
  c.evo.scale = scale;
  c.weight = weight;
  return c;
}

Scenario wave_scenario(int n, int cutoff, double a, double b, double T, int nt = 0) {
  Scenario sc;
  sc.grid = {1.0, n};
  sc.coeff_primary = CoefficientField::constant(1.0);
  sc.window = {a, b, T, nt};
  sc.cutoff = cutoff;
  sc.components = {component(EvolutionKind::Wave, 2, 1.0, 1.0)};
  return sc;
}

PrincipalSymbol symbol_const(EvolutionKind kind, int k, double c) {
  PrincipalSymbol p;
  p.kind = kind;
  p.order = k;
  p.base = CoefficientField::constant(c);
  p.domain_length = 1.0;
  return p;
}

InitialData mode_datum(const CompiledScenario& cs, int component_idx, int mode) {
  InitialData data;
  data.components.resize(cs.n_components());
  for (int i = 0; i < cs.n_components(); ++i)
    data.components[i].slots =
        Eigen::MatrixXcd::Zero(cs.cutoff(), cs.scenario.components[i].evo.order);
  data.components[component_idx].slots(mode - 1, 0) = 1.0;
  return data;
}

}  // namespace

int main() {
  Runner run;

  run.criterion(1, "discrete spectrum oracle (N=99, M=40, rel 1e-10)", [] {
    Grid1D grid{1.0, 99};
    const double h = grid.h();
    ModeBasis basis =
        eigendecompose(build_elliptic(grid, CoefficientField::constant(1.0)), 40);
    for (int j = 1; j <= 40; ++j) {
      const double exact =
          4.0 / (h * h) * std::pow(std::sin(j * std::numbers::pi * h / 2.0), 2);
      require(std::abs(basis.eigenvalues[j - 1] - exact) <= 1e-10 * exact,
              "eigenvalue " + std::to_string(j) + " off the analytic stencil value");
    }
  });

  run.criterion(2, "conservation suite (wave energy, Schrodinger norm, heat decay)", [] {
    const int n = 200, m = 60;
    const double T = 5.0;
    Scenario wsc = wave_scenario(n, m, 0.0, 1.0, T, 41);
    CompiledScenario wave = compile(wsc);
    InitialData wdata = couple_data(wave, random_unit_data(wave, 11, 1)[0]);
    auto wave_energy = [&](double t) {
      Eigen::MatrixXcd y = modal_state_at(wave, 0, wdata.components[0].slots, t);
      double e = 0.0;
      for (int j = 0; j < m; ++j)
        e += wave.lambda_eff[0][j] * std::norm(y(j, 0)) + std::norm(y(j, 1));
      return e;
    };
    const double e0 = wave_energy(0.0);
    for (int k = 1; k <= 20; ++k)
      require(std::abs(wave_energy(T * k / 20.0) - e0) <= 1e-10 * e0,
              "wave modal energy drifted");

    Scenario ssc = wsc;
    ssc.components[0] = component(EvolutionKind::Schrodinger, 1, 1.0, 1.0);
    CompiledScenario schrod = compile(ssc);
    InitialData sdata = couple_data(schrod, random_unit_data(schrod, 12, 1)[0]);
    const double n0 = modal_state_at(schrod, 0, sdata.components[0].slots, 0.0).norm();
    for (int k = 1; k <= 20; ++k) {
      const double nt = modal_state_at(schrod, 0, sdata.components[0].slots, T * k / 20.0).norm();
      require(std::abs(nt - n0) <= 1e-10 * n0, "Schrodinger L2 norm drifted");
    }

    Scenario hsc = wsc;
    hsc.components[0] = component(EvolutionKind::Heat, 1, 1.0, 1.0);
    CompiledScenario heat = compile(hsc);
    InitialData hdata = couple_data(heat, random_unit_data(heat, 13, 1)[0]);
    double prev = modal_state_at(heat, 0, hdata.components[0].slots, 0.0).norm();
    for (int k = 1; k <= 20; ++k) {
      const double cur =
          modal_state_at(heat, 0, hdata.components[0].slots, T * k / 20.0).norm();
      require(cur < prev, "heat norm not strictly decreasing");
      prev = cur;
    }
  });

  run.criterion(3, "Gramian-simulation equivalence (20 random data, rel 1e-8)", [] {
    Scenario sc = wave_scenario(199, 20, 0.6, 1.0, 3.0, 2001);
    sc.components.push_back(component(EvolutionKind::EvolutionK, 1, 0.5, 1.0));
    CompiledScenario cs = compile(sc);
    Gramian gram = assemble_gramian(cs);
    for (const Eigen::VectorXcd& v : random_unit_data(cs, 2026, 20)) {
      const double quad = (v.adjoint() * gram.g * v)(0, 0).real();
      const double direct = direct_observation_energy(cs, v);
      require(std::abs(quad - direct) <= 1e-8 * std::max(direct, 1e-30),
              "v*Gv = " + fmt(quad) + " vs direct " + fmt(direct));
    }
  });

  run.criterion(4, "exact-failure certificate and the separated-speed dichotomy", [] {
    Scenario cancel = wave_scenario(119, 16, 0.6, 1.0, 3.0);
    cancel.components.push_back(component(EvolutionKind::Wave, 2, -1.0, 1.0));
    ObservabilityReport bad = observability_constants(assemble_gramian(compile(cancel)), 1);
    require(bad.sigma_min == 0.0, "coincident symbols must give sigma_min = 0 exactly");
    require(std::isinf(bad.c_obs), "C_obs must be infinite");

    Scenario sep = cancel;
    sep.components[1] = component(EvolutionKind::Wave, 2, -1.0, 4.0);
    ObservabilityReport good = observability_constants(assemble_gramian(compile(sep)), 1);
    require(good.sigma_min > 1e-8 * good.sigma_max,
            "separated speeds must be observable, sigma_min = " + fmt(good.sigma_min));

    const double margin =
        separation_margin(symbol_of(sep, 0), symbol_of(sep, 1), 0.6, 1.0,
                          ScalingTag::Classical)
            .margin;
    require(margin > 0.0, "separation margin must be positive");
    const double gcc = gcc_time(sep.coeff_primary, 0.6, 1.0, 1.0, sep.grid.h());
    require(gcc < sep.window.T, "GCC time " + fmt(gcc) + " must stay below T");
  });

  run.criterion(5, "weak-vs-strong ordering with the K/E bound over a 10-point sweep", [] {
    Scenario sc = wave_scenario(119, 16, 0.6, 1.0, 3.0);
    sc.components.push_back(component(EvolutionKind::Wave, 2, -1.0, 4.0));
    Gramian off = assemble_gramian(compile(sc));
    Gramian on = off;
    on.compact_on = true;
    for (int m0 = 1; m0 <= 10; ++m0) {
      const double s_off = observability_constants(off, m0).sigma_min;
      const double s_on = observability_constants(on, m0).sigma_min;
      require(s_on >= s_off - 1e-13, "compact terms must not lower sigma_min");
      double bound = 0.0;
      for (int i = 0; i < off.dim(); ++i)
        if (off.coords[i].mode + 1 >= m0)
          bound = std::max(bound, off.compact[i] / off.energy[i]);
      require(s_on - s_off <= bound + 1e-12,
              "difference exceeds max K/E = " + fmt(bound));
    }
  });

  run.criterion(6, "symbol margins: two-wave 3/8, Schrodinger-heat parabolic", [] {
    SeparationReport waves =
        separation_margin(symbol_const(EvolutionKind::Wave, 2, 1.0),
                          symbol_const(EvolutionKind::Wave, 2, 4.0), 0.6, 1.0,
                          ScalingTag::Classical);
    require(std::abs(waves.margin - 3.0 / 8.0) <= 1e-3,
            "two-wave margin " + fmt(waves.margin) + " != 3/8");

    SeparationReport sh =
        separation_margin(symbol_const(EvolutionKind::Schrodinger, 1, 1.0),
                          symbol_const(EvolutionKind::Heat, 1, 1.0), 0.6, 1.0,
                          ScalingTag::Parabolic);
    require(sh.margin > 0.0, "Schrodinger-heat parabolic margin must be positive");
    require(sh.empty2, "heat parabolic characteristic set must be empty");
    require(!sh.empty1, "Schrodinger parabolic characteristic set must not be empty");
  });

  run.criterion(7, "GCC oracle: c = 1, omega = (0.7, 1) gives T* = 1.4 within 1e-3", [] {
    const double t =
        gcc_time(CoefficientField::constant(1.0), 0.7, 1.0, 1.0, 0.01);
    require(std::abs(t - 1.4) <= 1e-3, "gcc_time = " + fmt(t));
  });

  run.criterion(8, "localisation suite (wave classical/parabolic, heat, Schrodinger)", [] {
    const std::vector<int> modes = {10, 20, 30, 40, 50, 60};

    Scenario wsc = wave_scenario(400, 60, 0.0, 1.0, 1.0);
    CompiledScenario wave = compile(wsc);
    std::vector<SpaceTimeField> wfam = mode_family(wave, modes);
    PrincipalSymbol wsym = symbol_const(EvolutionKind::Wave, 2, 1.0);
    auto wrows = localisation_test(wfam, wsym, 0.0, 1.0, ScalingTag::Classical, 0.1);
    for (int i = 0; i + 1 < 6; ++i)
      require(wrows[i].fraction <= wrows[i + 1].fraction + 1e-9,
              "classical fraction must be non-decreasing in n");
    require(wrows[5].fraction >= 0.9,
            "classical fraction at n=6 is " + fmt(wrows[5].fraction));

    auto prows = localisation_test(wfam, wsym, 0.0, 1.0, ScalingTag::Parabolic, 0.1);
    require(prows[5].fraction >= 0.9,
            "equator fraction at n=6 is " + fmt(prows[5].fraction));

    Scenario hsc = wsc;
    hsc.components[0] = component(EvolutionKind::Heat, 1, 1.0, 1.0);
    hsc.window.T = 0.05;
    CompiledScenario heat = compile(hsc);
    std::vector<SpaceTimeField> hfam = mode_family(heat, modes);
    auto hrows = localisation_test(hfam, symbol_const(EvolutionKind::Heat, 1, 1.0), 0.0,
                                   1.0, ScalingTag::Parabolic, 0.1);
    require(hrows[5].nonexcluded_mass <= 1e-3,
            "heat non-excluded mass is " + fmt(hrows[5].nonexcluded_mass));

    Scenario ssc = wsc;
    ssc.components[0] = component(EvolutionKind::Schrodinger, 1, 1.0, 1.0);
    ssc.window.T = 0.02;
    CompiledScenario schrod = compile(ssc);
    std::vector<SpaceTimeField> sfam = mode_family(schrod, modes);
    PrincipalSymbol ssym = symbol_const(EvolutionKind::Schrodinger, 1, 1.0);
    AngularDensity sd = angular_density(sfam[5], ScalingTag::Parabolic, 72);
    double max_abs = 0.0;
    for (int k = 0; k < 720; ++k) {
      const DualPoint pt =
          hypersurface_point(ScalingTag::Parabolic, 2.0 * std::numbers::pi * k / 720.0);
      max_abs = std::max(max_abs, std::abs(eval_parabolic(ssym, 0.5, pt)));
    }
    double near = 0.0;
    for (int b = 0; b < sd.n_bins; ++b) {
      const DualPoint pt = hypersurface_point(ScalingTag::Parabolic, sd.bin_center(b));
      if (std::abs(eval_parabolic(ssym, 0.5, pt)) <= 0.1 * max_abs) near += sd.masses[b];
    }
    const double frac = near / sd.nonexcluded();
    require(frac >= 0.8, "Schrodinger parabolic concentration is " + fmt(frac));
  });

  run.criterion(9, "superposition counterexample (>= 0.3 vs <= 0.05 mass fractions)", [] {
    std::vector<double> theta(6);
    double sum = 0.0;
    for (int i = 0; i < 6; ++i) sum += (theta[i] = std::pow(0.5, i + 1));
    theta[5] += 1.0 - sum;
    CounterexampleTables t = counterexample_demo(theta, 6);
    for (int n = 2; n <= 6; ++n)
      require(t.fixed_f_fraction[n - 1] <= 0.05,
              "fixed-index member leaks " + fmt(t.fixed_f_fraction[n - 1]));
    for (int n = 1; n <= 6; ++n)
      require(t.superposed_f_fraction[n - 1] >= 0.3,
              "superposed member shows only " + fmt(t.superposed_f_fraction[n - 1]));
    for (int n = 1; n <= 6; ++n)
      require(t.compliant_f_fraction[n - 1] <= 0.05,
              "compliant family leaks " + fmt(t.compliant_f_fraction[n - 1]));
  });

  run.criterion(10, "simultaneous dichotomy with an empty kernel scan", [] {
    Scenario same = wave_scenario(119, 16, 0.6, 1.0, 3.0);
    same.coupling.mode = CouplingMode::Independent;
    same.components.push_back(component(EvolutionKind::Wave, 2, 1.0, 1.0));
    ObservabilityReport r_same = simultaneous_constants(compile(same));
    require(r_same.sigma_min <= 1e-10 * r_same.sigma_max,
            "identical waves must be simultaneously unobservable");

    Scenario sep = same;
    sep.components[1] = component(EvolutionKind::EvolutionK, 2, 1.0, 4.0);
    CompiledScenario cs = compile(sep);
    const double gcc1 = gcc_time(sep.coeff_primary, 0.6, 1.0, 1.0, sep.grid.h());
    const double gcc2 = gcc1 / 2.0;  // speed doubles with c = 4
    require(std::max(gcc1, gcc2) < sep.window.T, "T must dominate both GCC times");
    ObservabilityReport r_sep = simultaneous_constants(cs);
    require(r_sep.sigma_min > 1e-8 * r_sep.sigma_max,
            "separated simultaneous pair must be observable");
    KernelScanResult scan = kernel_scan(cs, 1e-8);
    require(scan.near_kernel.empty(),
            "kernel scan found " + std::to_string(scan.near_kernel.size()) + " elements");
  });

  run.criterion(11, "superposition stability across I in {2,4,8} and three families", [] {
    Scenario sc = wave_scenario(119, 24, 0.6, 1.0, 3.0);
    sc.components[0] = component(EvolutionKind::Wave, 2, 0.5, 4.0);  // fastest speed
    const double tail_speeds[7] = {1.0, 1.15, 1.3, 1.45, 1.6, 1.75, 1.9};
    for (double s : tail_speeds)
      sc.components.push_back(component(EvolutionKind::Wave, 2, 0.5 / 7.0, s));
    CompiledScenario cs = compile(sc);

    auto family = [](double theta1, double ratio) {
      std::vector<double> th(8);
      th[0] = theta1;
      double tail = 0.0;
      for (int i = 1; i < 8; ++i) tail += std::pow(ratio, i);
      for (int i = 1; i < 8; ++i) th[i] = (1.0 - theta1) * std::pow(ratio, i) / tail;
      return th;
    };
    std::vector<std::vector<double>> families = {family(0.5, 0.5), family(0.5, 0.25),
                                                 family(0.55, 1.0 / 3.0)};
    for (const auto& f : families)
      require(f[0] >= 0.5, "family must keep theta_1 >= 0.5");

    SuperpositionResult res = superposition_constants(cs, {2, 4, 8}, families);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const SuperpositionRow& r : res.rows) {
      lo = std::min(lo, r.sigma_min);
      hi = std::max(hi, r.sigma_min);
    }
    require(lo > 0.0, "superposed sigma_min must stay positive");
    require(hi <= 2.0 * lo,
            "sigma_min band [" + fmt(lo) + ", " + fmt(hi) + "] exceeds a factor 2");
    for (double cu : res.component_bound)
      require(cu > 0.0 && std::isfinite(cu), "component domination bound must be finite");
  });

  run.criterion(12, "determinism: repeated obsconst runs are byte-identical", [] {
    const char* scenario_text = R"({
      "domain": {"length": 1.0, "n_interior": 79},
      "window": {"a": 0.6, "b": 1.0, "T": 3.0},
      "components": [
        {"kind": "wave", "coeff": {"type": "constant", "value": 1.0}, "weight": 1.0},
        {"kind": "evolutionk", "k": 1, "scale": 1.0, "weight": 0.5}
      ],
      "cutoff": 12,
      "seed": 3
    })";
    obslab_scenario* sc = nullptr;
    require(obslab_scenario_parse(scenario_text, &sc) == OBSLAB_OK,
            std::string("scenario parse failed: ") + obslab_last_error());
    obslab_result* r1 = nullptr;
    obslab_result* r2 = nullptr;
    require(obslab_run(sc, "obsconst", "", &r1) == OBSLAB_OK,
            std::string("run 1 failed: ") + obslab_last_error());
    require(obslab_run(sc, "obsconst", "", &r2) == OBSLAB_OK,
            std::string("run 2 failed: ") + obslab_last_error());
    const std::string a = obslab_result_report_json(r1);
    const std::string b = obslab_result_report_json(r2);
    obslab_result_free(r1);
    obslab_result_free(r2);
    obslab_scenario_free(sc);
    require(!a.empty() && a == b, "reports differ between runs");
  });

  if (run.failures == 0) {
    std::printf("acceptance: all 12 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", run.failures);
  return 1;
}
