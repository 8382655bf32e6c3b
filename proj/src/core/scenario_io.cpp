#include "scenario_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

namespace obslab {

using nlohmann::json;

namespace {

const json& need(const json& obj, const std::string& key, const std::string& ctx) {
  if (!obj.is_object() || !obj.contains(key))
    throw_validation("SchemaError", ctx + key + ": missing required key");
  return obj.at(key);
}

double need_number(const json& obj, const std::string& key, const std::string& ctx) {
  const json& v = need(obj, key, ctx);
  if (!v.is_number())
    throw_validation("SchemaError", ctx + key + ": expected a number");
  return v.get<double>();
}

int need_int(const json& obj, const std::string& key, const std::string& ctx) {
  const json& v = need(obj, key, ctx);
  if (!v.is_number_integer())
    throw_validation("SchemaError", ctx + key + ": expected an integer");
  return v.get<int>();
}

double opt_number(const json& obj, const std::string& key, double fallback,
                  const std::string& ctx) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number())
    throw_validation("SchemaError", ctx + key + ": expected a number");
  return obj.at(key).get<double>();
}

std::vector<double> number_array(const json& v, const std::string& ctx) {
  if (!v.is_array() || v.empty())
    throw_validation("SchemaError", ctx + ": expected a nonempty array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number())
      throw_validation("SchemaError", ctx + ": expected a number");
    out.push_back(e.get<double>());
  }
  return out;
}

EvolutionKind kind_from_string(const std::string& s, const std::string& ctx) {
  if (s == "wave") return EvolutionKind::Wave;
  if (s == "schrodinger") return EvolutionKind::Schrodinger;
  if (s == "heat") return EvolutionKind::Heat;
  if (s == "evolutionk") return EvolutionKind::EvolutionK;
  throw_validation("SchemaError", ctx + "kind: unknown evolution kind '" + s + "'");
}

std::string kind_to_string(EvolutionKind k) {
  switch (k) {
    case EvolutionKind::Wave: return "wave";
    case EvolutionKind::Schrodinger: return "schrodinger";
    case EvolutionKind::Heat: return "heat";
    case EvolutionKind::EvolutionK: return "evolutionk";
  }
  return "wave";
}

Eigen::MatrixXcd load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_validation("SchemaError", "coupling.matrix_path: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw_validation("SchemaError", "coupling.matrix_path: " + std::string(e.what()));
  }
  if (!doc.is_array() || doc.empty())
    throw_validation("SchemaError", "coupling.matrix_path: expected an array of rows");
  const std::size_t cols = doc[0].size();
  Eigen::MatrixXcd m(doc.size(), cols);
  for (std::size_t r = 0; r < doc.size(); ++r) {
    std::vector<double> row = number_array(doc[r], "coupling matrix row");
    if (row.size() != cols)
      throw_validation("SchemaError", "coupling.matrix_path: ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
  }
  return m;
}

}  // namespace

CoefficientField coefficient_from_json(const json& doc, const std::string& key) {
  const std::string ctx = key + ".";
  const json& type = need(doc, "type", ctx);
  if (!type.is_string())
    throw_validation("SchemaError", ctx + "type: expected a string");
  const std::string t = type.get<std::string>();
  if (t == "constant") return CoefficientField::constant(need_number(doc, "value", ctx));
  if (t == "piecewise")
    return CoefficientField::piecewise(number_array(need(doc, "breaks", ctx), ctx + "breaks"),
                                       number_array(need(doc, "values", ctx), ctx + "values"));
  if (t == "samples")
    return CoefficientField::samples(number_array(need(doc, "values", ctx), ctx + "values"));
  throw_validation("SchemaError", ctx + "type: unknown coefficient type '" + t + "'");
}

json coefficient_to_json(const CoefficientField& coeff) {
  json j;
  switch (coeff.kind()) {
    case CoefficientField::Kind::Constant:
      j["type"] = "constant";
      j["value"] = coeff.values()[0];
      break;
    case CoefficientField::Kind::Piecewise:
      j["type"] = "piecewise";
      j["breaks"] = coeff.breaks();
      j["values"] = coeff.values();
      break;
    case CoefficientField::Kind::Samples:
      j["type"] = "samples";
      j["values"] = coeff.values();
      break;
  }
  return j;
}

Scenario parse_scenario(const json& doc, const std::string& base_dir) {
  if (!doc.is_object())
    throw_validation("SchemaError", "scenario: expected a JSON object");
  Scenario sc;

  const json& dom = need(doc, "domain", "");
  sc.grid.length = need_number(dom, "length", "domain.");
  sc.grid.n_interior = need_int(dom, "n_interior", "domain.");
  sc.grid.validate();

  const json& win = need(doc, "window", "");
  sc.window.a = need_number(win, "a", "window.");
  sc.window.b = need_number(win, "b", "window.");
  sc.window.T = need_number(win, "T", "window.");
  sc.window.nt = win.contains("nt") ? need_int(win, "nt", "window.") : 0;

  // alignment is a load-time contract
  const double h = sc.grid.h();
  for (auto [v, name] : {std::pair{sc.window.a, "window.a"}, {sc.window.b, "window.b"}}) {
    const double q = v / h;
    if (std::abs(q - std::lround(q)) > 1e-9 * std::max(1.0, std::abs(q)))
      throw_validation("AlignmentError",
                       std::string(name) + " is not aligned with the grid");
  }

  const json& comps = need(doc, "components", "");
  if (!comps.is_array() || comps.empty())
    throw_validation("SchemaError", "components: expected a nonempty array");
  auto check_samples = [&](const CoefficientField& c, const std::string& key) {
    if (c.kind() == CoefficientField::Kind::Samples &&
        static_cast<int>(c.values().size()) != sc.grid.n_interior + 2)
      throw_validation("SchemaError",
                       key + ": sampled coefficients must be node-aligned "
                             "(length n_interior + 2)");
  };
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string ctx = "components[" + std::to_string(i) + "].";
    const json& c = comps[i];
    ComponentSpec spec;
    const json& kind = need(c, "kind", ctx);
    if (!kind.is_string())
      throw_validation("SchemaError", ctx + "kind: expected a string");
    spec.evo.kind = kind_from_string(kind.get<std::string>(), ctx);
    int k = c.contains("k") ? need_int(c, "k", ctx) : 1;
    spec.evo.order = EvolutionSpec::order_of(spec.evo.kind, k);
    if (spec.evo.kind == EvolutionKind::EvolutionK && spec.evo.order < 1)
      throw_validation("SchemaError", ctx + "k: evolution order must be >= 1");
    spec.weight = need_number(c, "weight", ctx);

    const bool has_coeff = c.contains("coeff");
    const bool has_scale = c.contains("scale");
    const bool has_field = c.contains("scale_field");
    if (has_coeff + has_scale + has_field > 1)
      throw_validation("SchemaError",
                       ctx + "coeff: give at most one of coeff / scale / scale_field");
    if (i == 0) {
      if (!has_coeff)
        throw_validation("SchemaError", ctx + "coeff: the primary component needs one");
      sc.coeff_primary = coefficient_from_json(c.at("coeff"), ctx + "coeff");
      check_samples(sc.coeff_primary, ctx + "coeff");
      spec.evo.scale_mode = ScaleMode::SharedScalar;
      spec.evo.scale = 1.0;
    } else if (has_coeff) {
      spec.evo.scale_mode = ScaleMode::DistinctOperator;
      spec.evo.own_coeff = coefficient_from_json(c.at("coeff"), ctx + "coeff");
      check_samples(spec.evo.own_coeff, ctx + "coeff");
    } else if (has_field) {
      spec.evo.scale_mode = ScaleMode::SharedField;
      spec.evo.own_coeff = coefficient_from_json(c.at("scale_field"), ctx + "scale_field");
      check_samples(spec.evo.own_coeff, ctx + "scale_field");
    } else {
      spec.evo.scale_mode = ScaleMode::SharedScalar;
      spec.evo.scale = opt_number(c, "scale", 1.0, ctx);
      if (!(spec.evo.scale > 0.0))
        throw_validation("SchemaError", ctx + "scale: must be positive");
    }
    sc.components.push_back(std::move(spec));
  }

  if (doc.contains("coupling")) {
    const json& cp = doc.at("coupling");
    const json& mode = need(cp, "mode", "coupling.");
    if (!mode.is_string())
      throw_validation("SchemaError", "coupling.mode: expected a string");
    const std::string m = mode.get<std::string>();
    if (m == "linked_identity")
      sc.coupling.mode = CouplingMode::LinkedIdentity;
    else if (m == "linked_operator")
      sc.coupling.mode = CouplingMode::LinkedOperator;
    else if (m == "independent")
      sc.coupling.mode = CouplingMode::Independent;
    else if (m == "cone")
      sc.coupling.mode = CouplingMode::Cone;
    else
      throw_validation("SchemaError", "coupling.mode: unknown mode '" + m + "'");
    if (sc.coupling.mode == CouplingMode::Cone)
      sc.coupling.cone_constant = need_number(cp, "c", "coupling.");
    if (sc.coupling.mode == CouplingMode::LinkedOperator) {
      const json& mp = need(cp, "matrix_path", "coupling.");
      if (!mp.is_string())
        throw_validation("SchemaError", "coupling.matrix_path: expected a string");
      std::filesystem::path p(mp.get<std::string>());
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      sc.coupling.linked_ops.push_back(load_matrix(p.string()));
    }
  }

  if (doc.contains("cutoff"))
    sc.cutoff = need_int(doc, "cutoff", "");
  else
    sc.cutoff = default_cutoff(sc.grid.n_interior);

  if (doc.contains("compact_terms")) {
    if (!doc.at("compact_terms").is_boolean())
      throw_validation("SchemaError", "compact_terms: expected a boolean");
    sc.compact_terms = doc.at("compact_terms").get<bool>();
  }

  if (doc.contains("scaling")) {
    const json& s = doc.at("scaling");
    if (!s.is_string())
      throw_validation("SchemaError", "scaling: expected a string");
    const std::string v = s.get<std::string>();
    if (v == "classical")
      sc.scaling = ScalingTag::Classical;
    else if (v == "parabolic")
      sc.scaling = ScalingTag::Parabolic;
    else
      throw_validation("SchemaError", "scaling: unknown scaling '" + v + "'");
  }

  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer())
      throw_validation("SchemaError", "seed: expected an integer");
    sc.seed = doc.at("seed").get<std::uint64_t>();
  }

  // superposition weight contract is surfaced at load
  const bool linked = sc.coupling.mode == CouplingMode::LinkedIdentity ||
                      sc.coupling.mode == CouplingMode::LinkedOperator;
  if (linked && sc.components.size() > 2) {
    double sum = 0.0;
    for (const ComponentSpec& c : sc.components) {
      if (!(c.weight > 0.0))
        throw_validation("SequenceNotAveraging", "superposition weights must be positive");
      sum += c.weight;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw_validation("SequenceNotAveraging", "superposition weights must sum to 1");
  }

  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_validation("SchemaError", "cannot open scenario file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw_validation("SchemaError", std::string("scenario file: ") + e.what());
  }
  return parse_scenario(doc, std::filesystem::path(path).parent_path().string());
}

json scenario_to_json(const Scenario& sc) {
  json j;
  j["domain"] = {{"length", sc.grid.length}, {"n_interior", sc.grid.n_interior}};
  j["window"] = {{"a", sc.window.a}, {"b", sc.window.b}, {"T", sc.window.T},
                 {"nt", sc.window.nt}};
  json comps = json::array();
  for (std::size_t i = 0; i < sc.components.size(); ++i) {
    const ComponentSpec& c = sc.components[i];
    json jc;
    jc["kind"] = kind_to_string(c.evo.kind);
    jc["k"] = c.evo.order;
    jc["weight"] = c.weight;
    if (i == 0) {
      jc["coeff"] = coefficient_to_json(sc.coeff_primary);
    } else {
      switch (c.evo.scale_mode) {
        case ScaleMode::SharedScalar: jc["scale"] = c.evo.scale; break;
        case ScaleMode::DistinctOperator: jc["coeff"] = coefficient_to_json(c.evo.own_coeff); break;
        case ScaleMode::SharedField: jc["scale_field"] = coefficient_to_json(c.evo.own_coeff); break;
      }
    }
    comps.push_back(std::move(jc));
  }
  j["components"] = std::move(comps);
  json cp;
  switch (sc.coupling.mode) {
    case CouplingMode::LinkedIdentity: cp["mode"] = "linked_identity"; break;
    case CouplingMode::LinkedOperator: cp["mode"] = "linked_operator"; break;
    case CouplingMode::Independent: cp["mode"] = "independent"; break;
    case CouplingMode::Cone:
      cp["mode"] = "cone";
      cp["c"] = sc.coupling.cone_constant;
      break;
  }
  j["coupling"] = std::move(cp);
  j["cutoff"] = sc.cutoff;
  j["compact_terms"] = sc.compact_terms;
  j["scaling"] = sc.scaling == ScalingTag::Classical ? "classical" : "parabolic";
  j["seed"] = sc.seed;
  return j;
}

}  // namespace obslab
