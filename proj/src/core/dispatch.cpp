#include "dispatch.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "microlocal.hpp"
#include "observability.hpp"
#include "scenario_io.hpp"

namespace obslab {

using nlohmann::json;

int thread_cap() {
  const char* env = std::getenv("OBSLAB_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

RunOptions parse_options(const std::string& options_json) {
  RunOptions opt;
  if (options_json.empty()) return opt;
  json doc;
  try {
    doc = json::parse(options_json);
  } catch (const json::exception& e) {
    throw_validation("SchemaError", std::string("options: ") + e.what());
  }
  if (!doc.is_object()) throw_validation("SchemaError", "options: expected an object");
  if (doc.contains("m0_lo")) opt.m0_lo = doc.at("m0_lo").get<int>();
  if (doc.contains("m0_hi")) opt.m0_hi = doc.at("m0_hi").get<int>();
  if (doc.contains("bins")) opt.bins = doc.at("bins").get<int>();
  if (doc.contains("tol")) opt.tol = doc.at("tol").get<double>();
  if (doc.contains("scaling")) {
    const std::string s = doc.at("scaling").get<std::string>();
    if (s == "classical")
      opt.scaling = ScalingTag::Classical;
    else if (s == "parabolic")
      opt.scaling = ScalingTag::Parabolic;
    else
      throw_validation("SchemaError", "options.scaling: unknown scaling '" + s + "'");
  }
  if (doc.contains("truncations"))
    opt.truncations = doc.at("truncations").get<std::vector<int>>();
  if (doc.contains("theta_families"))
    opt.theta_families = doc.at("theta_families").get<std::vector<std::vector<double>>>();
  if (doc.contains("family_modes"))
    opt.family_modes = doc.at("family_modes").get<std::vector<int>>();
  return opt;
}

namespace {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// JSON-safe number: infinities/NaN have no JSON encoding, so C_obs = inf is
/// reported as the string "inf".
json num_or_inf(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json tolerances_json() {
  return json{{"eigen_residual", 1e-10},
              {"orthonormality", 1e-10},
              {"zero_set_membership", 1e-9},
              {"kernel_tol_default", 1e-8},
              {"eigen_match_delta", 1e-6},
              {"psd_slack", 1e-10},
              {"alignment", 1e-9}};
}

json report_shell(const std::string& command, const CompiledScenario& cs) {
  json j;
  j["tool"] = {{"name", "obslab"}, {"version", kVersion}};
  j["command"] = command;
  j["scenario"] = scenario_to_json(cs.scenario);
  j["tolerances"] = tolerances_json();
  return j;
}

json constants_json(const ObservabilityReport& rep, const Gramian& gram) {
  json j;
  j["sigma_min"] = rep.sigma_min;
  j["sigma_max"] = rep.sigma_max;
  j["c_obs"] = num_or_inf(rep.c_obs);
  j["m0"] = rep.m0;
  j["cutoff"] = rep.cutoff;
  j["dim"] = rep.dim;
  j["compact_terms"] = rep.compact_on;
  j["growth_warning"] = rep.growth_warning;
  // per-(component, slot) mass of the extremal datum
  json blocks = json::array();
  const int m = gram.layout.modes;
  for (std::size_t b = 0; b < gram.layout.blocks.size(); ++b) {
    const auto& blk = gram.layout.blocks[b];
    const double mass =
        rep.extremal.segment(static_cast<int>(b) * m, m).squaredNorm();
    blocks.push_back({{"component", blk.component}, {"slot", blk.slot}, {"mass", mass}});
  }
  j["extremal_block_mass"] = std::move(blocks);
  return j;
}

ScalingTag effective_scaling(const CompiledScenario& cs, const RunOptions& opt) {
  return opt.scaling.value_or(cs.scenario.scaling);
}

json margin_json(const SeparationReport& rep) {
  json j;
  j["margin"] = num_or_inf(rep.margin);
  j["empty_char_set_1"] = rep.empty1;
  j["empty_char_set_2"] = rep.empty2;
  j["witness"] = {{"x", rep.x_witness},
                  {"tau", rep.pt_witness.tau},
                  {"xi", rep.pt_witness.xi}};
  j["scaling"] = rep.scaling == ScalingTag::Classical ? "classical" : "parabolic";
  return j;
}

json diagnostics_json(const CompiledScenario& cs, ScalingTag scaling) {
  json diag;
  const Scenario& sc = cs.scenario;
  if (sc.components.size() >= 2) {
    PrincipalSymbol p0 = symbol_of(sc, 0);
    double worst = std::numeric_limits<double>::infinity();
    json margins = json::array();
    for (int i = 1; i < cs.n_components(); ++i) {
      SeparationReport rep =
          separation_margin(p0, symbol_of(sc, i), sc.window.a, sc.window.b, scaling);
      json mj = margin_json(rep);
      mj["pair"] = {0, i};
      margins.push_back(std::move(mj));
      worst = std::min(worst, rep.margin);
    }
    diag["margins"] = std::move(margins);
    diag["min_margin"] = num_or_inf(worst);
  }
  // GCC time of the primary rays; a scalar scale multiplies the speed by sqrt(scale)
  const double scale0 = sc.components[0].evo.scale;
  const double gcc = gcc_time(sc.coeff_primary, sc.window.a, sc.window.b, sc.grid.length,
                              sc.grid.h()) /
                     std::sqrt(scale0);
  diag["gcc_time_primary"] = gcc;
  diag["gcc_satisfied"] = gcc < sc.window.T;
  return diag;
}

std::string density_csv(const AngularDensity& d) {
  std::string csv = "bin_center_angle_or_arc,mass\n";
  for (int b = 0; b < d.n_bins; ++b)
    csv += fmt_g17(d.bin_center(b)) + "," + fmt_g17(d.masses[b]) + "\n";
  return csv;
}

json density_summary(const AngularDensity& d) {
  return json{{"n_bins", d.n_bins},
              {"total_mass", d.total},
              {"excluded_mass", d.excluded_mass},
              {"nonexcluded_mass", d.nonexcluded()},
              {"scaling", d.scaling == ScalingTag::Classical ? "classical" : "parabolic"}};
}

/// Ordered parallel map: applies fn(i) for i in [0, n) with at most
/// thread_cap() workers; results land in index order.
template <typename T, typename Fn>
std::vector<T> ordered_map(int n, Fn&& fn) {
  std::vector<T> out(n);
  const int workers = std::min(thread_cap(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) out[i] = fn(i);
    });
  for (auto& t : pool) t.join();
  return out;
}

RunResult run_modes(const CompiledScenario& cs) {
  json j = report_shell("modes", cs);
  const ModeBasis& basis = cs.bases[0];
  json lams = json::array();
  for (int i = 0; i < basis.count(); ++i) lams.push_back(basis.eigenvalues[i]);
  j["results"] = {{"eigenvalues", std::move(lams)},
                  {"lambda_min", basis.eigenvalues[0]},
                  {"lambda_max", basis.eigenvalues[basis.count() - 1]},
                  {"operator_trace", cs.op_primary.trace()}};
  std::string csv = "mode,lambda\n";
  for (int i = 0; i < basis.count(); ++i)
    csv += std::to_string(i + 1) + "," + fmt_g17(basis.eigenvalues[i]) + "\n";
  return {j.dump(2) + "\n", {{"modes.csv", std::move(csv)}}};
}

RunResult run_solve(const CompiledScenario& cs) {
  Eigen::VectorXcd free = random_unit_data(cs, cs.scenario.seed, 1)[0];
  InitialData data = couple_data(cs, free);
  std::vector<SpaceTimeField> fields = solve(cs, data);
  SpaceTimeField obs = observation_field(cs, fields);

  json j = report_shell("solve", cs);
  json comps = json::array();
  for (int i = 0; i < cs.n_components(); ++i)
    comps.push_back({{"component", i},
                     {"l2_omega_initial", fields[i].space_norm(0)},
                     {"l2_omega_final", fields[i].space_norm(fields[i].nt() - 1)}});
  j["results"] = {{"observation_energy", obs.integrate_abs2()},
                  {"components", std::move(comps)},
                  {"nt", cs.nt},
                  {"nx", cs.nx()}};

  std::string csv = "t,norm_obs";
  for (int i = 0; i < cs.n_components(); ++i) csv += ",norm_c" + std::to_string(i);
  csv += "\n";
  for (int t = 0; t < cs.nt; ++t) {
    csv += fmt_g17(cs.times[t]) + "," + fmt_g17(obs.space_norm(t));
    for (int i = 0; i < cs.n_components(); ++i)
      csv += "," + fmt_g17(fields[i].space_norm(t));
    csv += "\n";
  }
  return {j.dump(2) + "\n", {{"solve_trace.csv", std::move(csv)}}};
}

RunResult run_symbols(const CompiledScenario& cs, const RunOptions& opt) {
  const ScalingTag scaling = effective_scaling(cs, opt);
  const Scenario& sc = cs.scenario;
  json j = report_shell("symbols", cs);
  json margins = json::array();
  PrincipalSymbol p0 = symbol_of(sc, 0);
  for (int i = 1; i < cs.n_components(); ++i) {
    SeparationReport rep =
        separation_margin(p0, symbol_of(sc, i), sc.window.a, sc.window.b, scaling);
    json mj = margin_json(rep);
    mj["pair"] = {0, i};
    margins.push_back(std::move(mj));
  }
  j["results"] = {{"margins", std::move(margins)},
                  {"scaling", scaling == ScalingTag::Classical ? "classical" : "parabolic"}};

  // sampled |p| over the hypersurface: per angle, minimum over x in omega
  const int n_angle = 720, n_x = 100;
  std::string csv = "param";
  std::vector<PrincipalSymbol> syms;
  for (int i = 0; i < cs.n_components(); ++i) {
    syms.push_back(symbol_of(sc, i));
    csv += ",abs_p" + std::to_string(i + 1);
  }
  csv += "\n";
  for (int k = 0; k < n_angle; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n_angle;
    const DualPoint pt = hypersurface_point(scaling, phi);
    csv += fmt_g17(phi);
    for (const PrincipalSymbol& p : syms) {
      double best = std::numeric_limits<double>::infinity();
      for (int ix = 0; ix < n_x; ++ix) {
        const double x = sc.window.a + (sc.window.b - sc.window.a) * ix / (n_x - 1);
        best = std::min(best, std::abs(eval_symbol(p, x, pt, scaling)));
      }
      csv += "," + fmt_g17(best);
    }
    csv += "\n";
  }
  return {j.dump(2) + "\n", {{"symbols_samples.csv", std::move(csv)}}};
}

RunResult run_gramian(const CompiledScenario& cs) {
  Gramian gram = assemble_gramian(cs);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram.g);
  const auto& ev = es.eigenvalues();
  const double norm = std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
  json j = report_shell("gramian", cs);
  j["results"] = {{"dim", gram.dim()},
                  {"herm_residual", gram.herm_residual},
                  {"eig_min", ev[0]},
                  {"eig_max", ev[ev.size() - 1]},
                  {"psd_slack", norm > 0.0 ? std::max(0.0, -ev[0]) / norm : 0.0},
                  {"growth_warning", gram.growth_warning}};
  std::string csv = "index,eigenvalue\n";
  for (int i = 0; i < ev.size(); ++i)
    csv += std::to_string(i) + "," + fmt_g17(ev[i]) + "\n";
  return {j.dump(2) + "\n", {{"gramian_spectrum.csv", std::move(csv)}}};
}

RunResult run_obsconst(const CompiledScenario& cs, const RunOptions& opt) {
  Gramian gram = assemble_gramian(cs);
  ObservabilityReport rep = observability_constants(gram, opt.m0_lo);
  json j = report_shell("obsconst", cs);
  j["results"] = constants_json(rep, gram);
  j["diagnostics"] = diagnostics_json(cs, effective_scaling(cs, opt));
  if (cs.scenario.coupling.mode == CouplingMode::Cone) {
    ConeCheck cone = cone_check(cs, rep.extremal);
    j["results"]["cone_check"] = {{"norm_primary", cone.norm_primary},
                                  {"norm_secondary", cone.norm_secondary},
                                  {"feasible", cone.feasible}};
  }
  return {j.dump(2) + "\n", {}};
}

RunResult run_sweep(const CompiledScenario& cs, const RunOptions& opt) {
  const int lo = opt.m0_lo;
  const int hi = opt.m0_hi > 0 ? opt.m0_hi : std::min(lo + 9, cs.cutoff() - 5);
  Gramian gram = assemble_gramian(cs);
  if (lo < 1 || hi < lo)
    throw_validation("InvalidArgument", "invalid m0 range");
  if (gram.layout.modes < hi + 5)
    throw_validation("InvalidArgument", "cutoff must exceed the largest m0 by at least 5");
  std::vector<SweepRow> rows = ordered_map<SweepRow>(hi - lo + 1, [&](int i) {
    ObservabilityReport r = observability_constants(gram, lo + i);
    return SweepRow{lo + i, r.sigma_min, r.c_obs};
  });
  json j = report_shell("sweep", cs);
  json table = json::array();
  std::string csv = "m0,sigma_min,C_obs\n";
  for (const SweepRow& r : rows) {
    table.push_back(
        {{"m0", r.m0}, {"sigma_min", r.sigma_min}, {"c_obs", num_or_inf(r.c_obs)}});
    csv += std::to_string(r.m0) + "," + fmt_g17(r.sigma_min) + "," +
           (std::isinf(r.c_obs) ? std::string("inf") : fmt_g17(r.c_obs)) + "\n";
  }
  j["results"] = {{"table", std::move(table)}, {"m0_lo", lo}, {"m0_hi", hi}};
  return {j.dump(2) + "\n", {{"sweep.csv", std::move(csv)}}};
}

RunResult run_simul(const CompiledScenario& cs, const RunOptions& opt) {
  Gramian gram = assemble_gramian(cs);
  ObservabilityReport rep = observability_constants(gram, 1);
  json j = report_shell("simul", cs);
  j["results"] = constants_json(rep, gram);
  j["diagnostics"] = diagnostics_json(cs, effective_scaling(cs, opt));
  return {j.dump(2) + "\n", {}};
}

RunResult run_super(const CompiledScenario& cs, const RunOptions& opt) {
  std::vector<int> truncs = opt.truncations;
  if (truncs.empty()) truncs = {cs.n_components()};
  std::vector<std::vector<double>> families = opt.theta_families;
  if (families.empty()) {
    std::vector<double> own;
    for (int i = 0; i < cs.n_components(); ++i) own.push_back(cs.theta(i));
    families.push_back(std::move(own));
  }
  SuperpositionResult res = superposition_constants(cs, truncs, families);

  json j = report_shell("super", cs);
  json rows = json::array();
  std::string csv = "family,I,sigma_min,C_obs\n";
  for (const SuperpositionRow& r : res.rows) {
    rows.push_back({{"family", r.family},
                    {"I", r.truncation},
                    {"theta1", r.theta1},
                    {"sigma_min", r.sigma_min},
                    {"c_obs", num_or_inf(r.c_obs)}});
    csv += std::to_string(r.family) + "," + std::to_string(r.truncation) + "," +
           fmt_g17(r.sigma_min) + "," +
           (std::isinf(r.c_obs) ? std::string("inf") : fmt_g17(r.c_obs)) + "\n";
  }
  json bounds = json::array();
  std::string ucsv = "component,C_u\n";
  for (std::size_t i = 0; i < res.component_bound.size(); ++i) {
    bounds.push_back(res.component_bound[i]);
    ucsv += std::to_string(i) + "," + fmt_g17(res.component_bound[i]) + "\n";
  }
  j["results"] = {{"rows", std::move(rows)}, {"component_bound", std::move(bounds)}};
  return {j.dump(2) + "\n",
          {{"super.csv", std::move(csv)}, {"super_uniformity.csv", std::move(ucsv)}}};
}

RunResult run_kernel(const CompiledScenario& cs, const RunOptions& opt) {
  KernelScanResult res = kernel_scan(cs, opt.tol);
  json j = report_shell("kernel", cs);
  json elems = json::array();
  for (const KernelElement& el : res.near_kernel)
    elems.push_back({{"sigma", el.sigma}, {"residual_l2_omega", el.residual_l2_omega}});
  json crits = json::array();
  for (const auto& c : res.criteria) {
    json cj = {{"component", c.component},
               {"delta", c.delta},
               {"matches", static_cast<int>(c.matches.size())}};
    cj["min_combo_norm"] = c.min_combo_norm ? json(*c.min_combo_norm) : json(nullptr);
    crits.push_back(std::move(cj));
  }
  j["results"] = {{"near_kernel", std::move(elems)},
                  {"near_kernel_count", static_cast<int>(res.near_kernel.size())},
                  {"sigma_max", res.sigma_max},
                  {"tol", res.tol},
                  {"eigen_match_criteria", std::move(crits)}};
  return {j.dump(2) + "\n", {}};
}

RunResult run_hmeasure(const CompiledScenario& cs, const RunOptions& opt) {
  const ScalingTag scaling = effective_scaling(cs, opt);
  json j = report_shell("hmeasure", cs);
  RunResult out;

  if (!opt.family_modes.empty()) {
    std::vector<SpaceTimeField> members = mode_family(cs, opt.family_modes, 0);
    PrincipalSymbol p0 = symbol_of(cs.scenario, 0);
    std::vector<LocalisationRow> rows =
        localisation_test(members, p0, cs.scenario.window.a, cs.scenario.window.b, scaling,
                          0.1, opt.bins);
    json table = json::array();
    for (std::size_t n = 0; n < members.size(); ++n) {
      AngularDensity d = angular_density(members[n], scaling, opt.bins);
      out.csvs.push_back({"hmeasure_bins_n" + std::to_string(n + 1) + ".csv",
                          density_csv(d)});
      json row = density_summary(d);
      row["n"] = rows[n].n;
      row["mode"] = opt.family_modes[n];
      row["fraction_near_char_set"] = num_or_inf(rows[n].fraction);
      table.push_back(std::move(row));
    }
    j["results"] = {{"family", std::move(table)}, {"epsilon", 0.1}};
  } else {
    Eigen::VectorXcd free = random_unit_data(cs, cs.scenario.seed, 1)[0];
    std::vector<SpaceTimeField> fields = solve(cs, couple_data(cs, free));
    AngularDensity d = angular_density(observation_field(cs, fields), scaling, opt.bins);
    out.csvs.push_back({"hmeasure_bins.csv", density_csv(d)});
    j["results"] = density_summary(d);
  }
  out.report_json = j.dump(2) + "\n";
  return out;
}

}  // namespace

RunResult dispatch(const std::string& command, const Scenario& scenario,
                   const RunOptions& options) {
  CompiledScenario cs = compile(scenario);
  if (command == "modes") return run_modes(cs);
  if (command == "solve") return run_solve(cs);
  if (command == "symbols") return run_symbols(cs, options);
  if (command == "gramian") return run_gramian(cs);
  if (command == "obsconst") return run_obsconst(cs, options);
  if (command == "sweep") return run_sweep(cs, options);
  if (command == "simul") return run_simul(cs, options);
  if (command == "super") return run_super(cs, options);
  if (command == "kernel") return run_kernel(cs, options);
  if (command == "hmeasure") return run_hmeasure(cs, options);
  throw_validation("SchemaError", "unknown command '" + command + "'");
}

}  // namespace obslab
