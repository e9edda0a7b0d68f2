#include "upress/config.hpp"

#include "upress/error.hpp"

#include <json.hpp>
#include <fmt/core.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace upress {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::Config, path + ": " + message);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

// ---- YAML <-> json tree -------------------------------------------------------------------------

json scalar_to_json(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted scalars stay strings
  if (s == "~" || s == "null") return nullptr;
  if (s == "true") return true;
  if (s == "false") return false;
  std::int64_t i = 0;
  if (auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i); ec == std::errc() && p == s.data() + s.size())
    return i;
  std::uint64_t u = 0;
  if (auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), u); ec == std::errc() && p == s.data() + s.size())
    return u;
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d); ec == std::errc() && p == s.data() + s.size())
    return d;
  return s;
}

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

void emit_yaml(YAML::Emitter& out, const json& j) {
  switch (j.type()) {
    case json::value_t::object:
      out << YAML::BeginMap;
      for (const auto& [k, v] : j.items()) {
        out << YAML::Key << k << YAML::Value;
        emit_yaml(out, v);
      }
      out << YAML::EndMap;
      break;
    case json::value_t::array: {
      const bool flat = std::none_of(j.begin(), j.end(), [](const json& v) { return v.is_structured(); });
      out << (flat ? YAML::Flow : YAML::Block) << YAML::BeginSeq;
      for (const auto& v : j) emit_yaml(out, v);
      out << YAML::EndSeq;
      break;
    }
    case json::value_t::string:
      out << YAML::DoubleQuoted << j.get<std::string>();
      break;
    case json::value_t::boolean:
      out << j.get<bool>();
      break;
    case json::value_t::number_integer:
      out << j.get<std::int64_t>();
      break;
    case json::value_t::number_unsigned:
      out << j.get<std::uint64_t>();
      break;
    case json::value_t::number_float:
      // Shortest text that reads back to the same double.
      out << fmt::format("{}", j.get<double>());
      break;
    default:
      out << YAML::Null;
  }
}

// ---- typed readers ------------------------------------------------------------------------------

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path.empty() ? "config" : path, "expected a table");
  for (const auto& [k, v] : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      fail(join(path, k), "unknown field");
}

double read_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

long long read_integer(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::floor(v) == v && std::abs(v) < 1e15) return static_cast<long long>(v);
  }
  fail(path, "expected an integer");
}

int read_int(const json& j, const std::string& path) {
  const long long v = read_integer(j, path);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(path, "integer out of range");
  return static_cast<int>(v);
}

std::uint64_t read_u64(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const long long v = read_integer(j, path);
  if (v < 0) fail(path, "must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

bool read_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::string read_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

template <class T, class F>
std::vector<T> read_list(const json& j, const std::string& path, F&& item) {
  if (!j.is_array()) fail(path, "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(item(j[i], index(path, i)));
  return out;
}

template <class T, class F>
void optional_field(const json& j, const char* key, const std::string& path, T& target, F&& read) {
  if (j.contains(key)) target = read(j.at(key), join(path, key));
}

// ---- spec <-> json ------------------------------------------------------------------------------

json term_to_json(const TrigTerm& t, bool with_component) {
  json j = json::object();
  if (with_component) j["component"] = t.component;
  j["wave"] = t.wave;
  j["sin"] = t.sin_coef;
  j["cos"] = t.cos_coef;
  return j;
}

TrigTerm term_from_json(const json& j, const std::string& path, bool with_component) {
  if (with_component)
    check_keys(j, path, {"component", "wave", "sin", "cos"});
  else
    check_keys(j, path, {"wave", "sin", "cos"});
  TrigTerm t;
  if (with_component) {
    const int c = j.contains("component") ? read_int(j.at("component"), join(path, "component")) : 0;
    if (c < 0) fail(join(path, "component"), "must be nonnegative");
    t.component = static_cast<std::size_t>(c);
  }
  if (!j.contains("wave")) fail(join(path, "wave"), "missing");
  t.wave = read_list<int>(j.at("wave"), join(path, "wave"), read_int);
  optional_field(j, "sin", path, t.sin_coef, read_double);
  optional_field(j, "cos", path, t.cos_coef, read_double);
  return t;
}

json phi_to_json(const TrigPolynomial& phi) {
  json j = json::object();
  j["constant"] = phi.constant;
  json terms = json::array();
  for (const auto& t : phi.terms) terms.push_back(term_to_json(t, false));
  j["terms"] = terms;
  return j;
}

TrigPolynomial phi_from_json(const json& j, const std::string& path) {
  check_keys(j, path, {"constant", "terms"});
  TrigPolynomial phi;
  optional_field(j, "constant", path, phi.constant, read_double);
  if (j.contains("terms"))
    phi.terms = read_list<TrigTerm>(j.at("terms"), join(path, "terms"),
                                    [](const json& t, const std::string& p) { return term_from_json(t, p, false); });
  return phi;
}

struct KindShape {
  bool value;
  bool steps;
  bool phi;
  int children;
};

const std::map<std::string, KindShape>& kind_shapes() {
  static const std::map<std::string, KindShape> shapes{
      {"birkhoff", {false, false, true, 0}},   {"cocycle_norm", {true, false, false, 0}},
      {"constant", {true, false, false, 0}},   {"sum", {false, false, false, 2}},
      {"scale", {true, false, false, 1}},      {"shift", {true, false, false, 1}},
      {"twist", {false, false, false, 2}},     {"max", {false, false, false, 2}},
      {"stage", {false, true, false, 1}},
  };
  return shapes;
}

json potential_to_json(const PotentialSpec& p) {
  json j = json::object();
  j["kind"] = p.kind;
  auto it = kind_shapes().find(p.kind);
  const KindShape shape = it == kind_shapes().end() ? KindShape{true, true, true, 2} : it->second;
  if (shape.value) j["value"] = p.value;
  if (shape.steps) j["steps"] = p.steps;
  if (shape.phi) j["phi"] = phi_to_json(p.phi);
  if (shape.children) {
    json kids = json::array();
    for (const auto& c : p.children) kids.push_back(potential_to_json(c));
    j["children"] = kids;
  }
  return j;
}

PotentialSpec potential_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected a table");
  if (!j.contains("kind")) fail(join(path, "kind"), "missing");
  PotentialSpec p;
  p.kind = read_string(j.at("kind"), join(path, "kind"));
  auto it = kind_shapes().find(p.kind);
  if (it == kind_shapes().end()) fail(join(path, "kind"), "unknown potential kind '" + p.kind + "'");
  const auto& shape = it->second;
  for (const auto& [k, v] : j.items()) {
    const bool ok = k == "kind" || (k == "value" && shape.value) || (k == "steps" && shape.steps) ||
                    (k == "phi" && shape.phi) || (k == "children" && shape.children);
    if (!ok) fail(join(path, k), "not used by kind '" + p.kind + "'");
  }
  optional_field(j, "value", path, p.value, read_double);
  optional_field(j, "steps", path, p.steps, read_int);
  if (j.contains("phi")) p.phi = phi_from_json(j.at("phi"), join(path, "phi"));
  if (j.contains("children")) p.children = read_list<PotentialSpec>(j.at("children"), join(path, "children"), potential_from_json);
  return p;
}

json system_to_json(const SystemSpec& s) {
  json j = json::object();
  j["name"] = s.name;
  j["matrix"] = s.matrix;
  j["translation"] = s.translation;
  json terms = json::array();
  for (const auto& t : s.perturbation) terms.push_back(term_to_json(t, true));
  j["perturbation"] = terms;
  j["magnitude"] = s.magnitude;
  return j;
}

SystemSpec system_from_json(const json& j, const std::string& path) {
  check_keys(j, path, {"name", "matrix", "translation", "perturbation", "magnitude"});
  SystemSpec s;
  optional_field(j, "name", path, s.name, read_string);
  if (j.contains("matrix"))
    s.matrix = read_list<std::vector<int>>(j.at("matrix"), join(path, "matrix"), [](const json& row, const std::string& p) {
      return read_list<int>(row, p, read_int);
    });
  if (j.contains("translation")) s.translation = read_list<double>(j.at("translation"), join(path, "translation"), read_double);
  if (j.contains("perturbation"))
    s.perturbation = read_list<TrigTerm>(j.at("perturbation"), join(path, "perturbation"),
                                         [](const json& t, const std::string& p) { return term_from_json(t, p, true); });
  optional_field(j, "magnitude", path, s.magnitude, read_double);
  return s;
}

json pressure_to_json(const PressureParams& p) {
  json j = json::object();
  j["delta"] = p.delta;
  j["epsilons"] = p.epsilons;
  j["n_min"] = p.n_min;
  j["n_max"] = p.n_max;
  j["density_factor"] = p.density_factor;
  j["max_samples"] = p.max_samples;
  j["graph_iterations"] = p.graph_iterations;
  j["lift_budget"] = p.lift_budget;
  j["jobs"] = p.jobs;
  return j;
}

PressureParams pressure_from_json(const json& j, const std::string& path) {
  check_keys(j, path,
             {"delta", "epsilons", "n_min", "n_max", "density_factor", "max_samples", "graph_iterations", "lift_budget",
              "jobs"});
  PressureParams p;
  optional_field(j, "delta", path, p.delta, read_double);
  if (j.contains("epsilons")) p.epsilons = read_list<double>(j.at("epsilons"), join(path, "epsilons"), read_double);
  optional_field(j, "n_min", path, p.n_min, read_int);
  optional_field(j, "n_max", path, p.n_max, read_int);
  optional_field(j, "density_factor", path, p.density_factor, read_int);
  if (j.contains("max_samples")) p.max_samples = read_u64(j.at("max_samples"), join(path, "max_samples"));
  optional_field(j, "graph_iterations", path, p.graph_iterations, read_int);
  optional_field(j, "lift_budget", path, p.lift_budget, read_double);
  optional_field(j, "jobs", path, p.jobs, read_int);
  return p;
}

json verify_to_json(const VerifySpec& v) {
  json j = json::object();
  j["variational"] = v.variational;
  j["properties"] = v.properties;
  j["power_rule"] = v.power_rule;
  j["stage_limit"] = v.stage_limit;
  j["cover"] = v.cover;
  j["oracle"] = v.oracle;
  j["registry"] = v.registry;
  j["haar_samples"] = v.haar_samples;
  j["lyapunov_stages"] = v.lyapunov_stages;
  j["property_h"] = potential_to_json(v.property_h);
  j["shift_c"] = v.shift_c;
  j["convex_p"] = v.convex_p;
  j["power_k"] = v.power_k;
  j["stages"] = v.stages;
  j["cover_epsilons"] = v.cover_epsilons;
  j["cover_n_max"] = v.cover_n_max;
  return j;
}

VerifySpec verify_from_json(const json& j, const std::string& path) {
  check_keys(j, path,
             {"variational", "properties", "power_rule", "stage_limit", "cover", "oracle", "registry", "haar_samples",
              "lyapunov_stages", "property_h", "shift_c", "convex_p", "power_k", "stages", "cover_epsilons",
              "cover_n_max"});
  VerifySpec v;
  optional_field(j, "variational", path, v.variational, read_bool);
  optional_field(j, "properties", path, v.properties, read_bool);
  optional_field(j, "power_rule", path, v.power_rule, read_bool);
  optional_field(j, "stage_limit", path, v.stage_limit, read_bool);
  optional_field(j, "cover", path, v.cover, read_bool);
  optional_field(j, "oracle", path, v.oracle, read_bool);
  if (j.contains("registry"))
    v.registry = read_list<std::string>(j.at("registry"), join(path, "registry"), read_string);
  optional_field(j, "haar_samples", path, v.haar_samples, read_int);
  if (j.contains("lyapunov_stages"))
    v.lyapunov_stages = read_list<int>(j.at("lyapunov_stages"), join(path, "lyapunov_stages"), read_int);
  if (j.contains("property_h")) v.property_h = potential_from_json(j.at("property_h"), join(path, "property_h"));
  optional_field(j, "shift_c", path, v.shift_c, read_double);
  optional_field(j, "convex_p", path, v.convex_p, read_double);
  optional_field(j, "power_k", path, v.power_k, read_int);
  if (j.contains("stages")) v.stages = read_list<int>(j.at("stages"), join(path, "stages"), read_int);
  if (j.contains("cover_epsilons"))
    v.cover_epsilons = read_list<double>(j.at("cover_epsilons"), join(path, "cover_epsilons"), read_double);
  optional_field(j, "cover_n_max", path, v.cover_n_max, read_int);
  return v;
}

json config_to_json(const RunConfig& c) {
  json j = json::object();
  j["name"] = c.name;
  j["system"] = system_to_json(c.system);
  j["potential"] = potential_to_json(c.potential);
  j["base_point"] = c.base_point;
  j["pressure"] = pressure_to_json(c.pressure);
  j["seed"] = c.seed;
  j["tolerance"] = c.tolerance;
  j["verify"] = verify_to_json(c.verify);
  j["sweep"] = {{"axis", c.sweep.axis}, {"values", c.sweep.values}};
  j["oracle"] = {{"instances", c.oracle.instances}, {"max_m", c.oracle.max_m}};
  j["output_dir"] = c.output_dir;
  return j;
}

RunConfig config_from_json(const json& j) {
  check_keys(j, "",
             {"name", "system", "potential", "base_point", "pressure", "seed", "tolerance", "verify", "sweep", "oracle",
              "output_dir"});
  RunConfig c;
  optional_field(j, "name", "", c.name, read_string);
  if (j.contains("system")) c.system = system_from_json(j.at("system"), "system");
  if (j.contains("potential")) c.potential = potential_from_json(j.at("potential"), "potential");
  if (j.contains("base_point")) c.base_point = read_list<double>(j.at("base_point"), "base_point", read_double);
  if (j.contains("pressure")) c.pressure = pressure_from_json(j.at("pressure"), "pressure");
  if (j.contains("seed")) c.seed = read_u64(j.at("seed"), "seed");
  optional_field(j, "tolerance", "", c.tolerance, read_double);
  if (j.contains("verify")) c.verify = verify_from_json(j.at("verify"), "verify");
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    check_keys(s, "sweep", {"axis", "values"});
    optional_field(s, "axis", "sweep", c.sweep.axis, read_string);
    if (s.contains("values")) c.sweep.values = read_list<double>(s.at("values"), "sweep.values", read_double);
  }
  if (j.contains("oracle")) {
    const auto& o = j.at("oracle");
    check_keys(o, "oracle", {"instances", "max_m"});
    optional_field(o, "instances", "oracle", c.oracle.instances, read_int);
    optional_field(o, "max_m", "oracle", c.oracle.max_m, read_int);
  }
  optional_field(j, "output_dir", "", c.output_dir, read_string);
  return c;
}

// ---- validation ---------------------------------------------------------------------------------

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) fail(path, message);
}

void validate_stages(const std::vector<int>& stages, const std::string& path) {
  require(!stages.empty(), path, "must not be empty");
  for (std::size_t i = 0; i < stages.size(); ++i)
    require(stages[i] >= 1 && (i == 0 || stages[i] > stages[i - 1]), index(path, i),
            "stages must be positive and strictly increasing");
}

void validate_phi(const TrigPolynomial& phi, std::size_t dim, const std::string& path) {
  for (std::size_t i = 0; i < phi.terms.size(); ++i)
    require(phi.terms[i].wave.size() == dim, join(index(join(path, "terms"), i), "wave"),
            "wave vector length must equal the torus dimension");
}

void validate_potential(const PotentialSpec& p, std::size_t dim, const std::string& path) {
  const auto& shape = kind_shapes().at(p.kind);
  require(static_cast<int>(p.children.size()) == shape.children, join(path, "children"),
          "kind '" + p.kind + "' takes " + std::to_string(shape.children) + " children");
  if (p.kind == "scale") require(p.value >= 0.0, join(path, "value"), "scale factor must be >= 0");
  if (p.kind == "stage") require(p.steps >= 1, join(path, "steps"), "stage length must be >= 1");
  if (p.kind == "birkhoff") validate_phi(p.phi, dim, join(path, "phi"));
  for (std::size_t i = 0; i < p.children.size(); ++i) validate_potential(p.children[i], dim, index(join(path, "children"), i));
  if (p.kind == "twist")
    require(make_potential(p.children[1]).is_additive(), index(join(path, "children"), 1),
            "the coboundary term must be an additive potential");
}

}  // namespace

void validate_config(const RunConfig& c) {
  require(!c.name.empty(), "name", "must not be empty");
  const auto& s = c.system;
  const std::size_t d = s.matrix.size();
  require(d >= 2, "system.matrix", "need at least a 2x2 matrix");
  for (std::size_t i = 0; i < d; ++i)
    require(s.matrix[i].size() == d, index("system.matrix", i), "matrix must be square");
  require(s.translation.size() == d, "system.translation", "length must equal the torus dimension");
  for (std::size_t i = 0; i < s.perturbation.size(); ++i) {
    const auto path = index("system.perturbation", i);
    require(s.perturbation[i].component < d, join(path, "component"), "component out of range");
    require(s.perturbation[i].wave.size() == d, join(path, "wave"), "wave vector length must equal the dimension");
  }
  require(s.magnitude >= 0.0, "system.magnitude", "must be >= 0");
  TorusSystem sys = [&] {
    try {
      return make_system(s);
    } catch (const Error& e) {
      fail("system", e.what());
    }
  }();
  require(sys.unstable_dim() == 1, "system.matrix", "exactly one expanding eigenvalue is required");
  if (sys.has_perturbation())
    require(sys.within_cone_threshold(), "system.magnitude", "exceeds the cone-preservation threshold");

  validate_potential(c.potential, d, "potential");
  require(c.base_point.size() == d, "base_point", "length must equal the torus dimension");

  const auto& p = c.pressure;
  require(p.delta > 0.0 && p.delta < kMaxLeafRadius, "pressure.delta", "must lie in (0, 0.25)");
  require(!p.epsilons.empty(), "pressure.epsilons", "must not be empty");
  for (std::size_t i = 0; i < p.epsilons.size(); ++i)
    require(p.epsilons[i] > 0.0, index("pressure.epsilons", i), "must be positive");
  require(p.n_min >= 1, "pressure.n_min", "must be >= 1");
  require(p.n_max >= p.n_min, "pressure.n_max", "must be >= n_min");
  require(p.density_factor >= 1, "pressure.density_factor", "must be >= 1");
  require(p.max_samples >= 2, "pressure.max_samples", "must be >= 2");
  require(p.graph_iterations >= 1 && p.graph_iterations <= 200, "pressure.graph_iterations", "must lie in [1, 200]");
  require(p.lift_budget > 0.0, "pressure.lift_budget", "must be positive");
  require(p.jobs >= 1, "pressure.jobs", "must be >= 1");
  require(c.tolerance > 0.0, "tolerance", "must be positive");

  const auto& v = c.verify;
  static const std::set<std::string> kRegistry{"haar", "fixed-point"};
  require(!v.registry.empty(), "verify.registry", "must not be empty");
  for (std::size_t i = 0; i < v.registry.size(); ++i)
    require(kRegistry.count(v.registry[i]) == 1, index("verify.registry", i), "expected 'haar' or 'fixed-point'");
  require(v.haar_samples >= 2, "verify.haar_samples", "must be >= 2");
  validate_stages(v.lyapunov_stages, "verify.lyapunov_stages");
  validate_potential(v.property_h, d, "verify.property_h");
  require(v.convex_p >= 0.0 && v.convex_p <= 1.0, "verify.convex_p", "must lie in [0, 1]");
  require(v.power_k == 2 || v.power_k == 3, "verify.power_k", "must be 2 or 3");
  validate_stages(v.stages, "verify.stages");
  require(!v.cover_epsilons.empty(), "verify.cover_epsilons", "must not be empty");
  for (std::size_t i = 0; i < v.cover_epsilons.size(); ++i)
    require(v.cover_epsilons[i] > 0.0, index("verify.cover_epsilons", i), "must be positive");
  require(v.cover_n_max >= 1 && v.cover_n_max <= 8, "verify.cover_n_max", "must lie in [1, 8]");

  static const std::set<std::string> kAxes{"epsilon", "delta", "n", "magnitude", "exponent"};
  require(kAxes.count(c.sweep.axis) == 1, "sweep.axis", "expected epsilon, delta, n, magnitude or exponent");
  require(c.oracle.instances >= 1, "oracle.instances", "must be >= 1");
  require(c.oracle.max_m >= 1 && c.oracle.max_m <= static_cast<int>(kBruteForceLimit), "oracle.max_m",
          "must lie in [1, 20]");
  require(!c.output_dir.empty(), "output_dir", "must not be empty");
}

RunConfig parse_config(const std::string& text) {
  json tree;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      tree = json::parse(text);
    } catch (const json::exception& e) {
      fail("config", std::string("invalid JSON: ") + e.what());
    }
  } else {
    try {
      tree = yaml_to_json(YAML::Load(text));
    } catch (const YAML::Exception& e) {
      fail("config", std::string("invalid YAML: ") + e.what());
    }
  }
  if (tree.is_null()) tree = json::object();
  return config_from_json(tree);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& config) {
  YAML::Emitter out;
  emit_yaml(out, config_to_json(config));
  return std::string(out.c_str()) + "\n";
}

std::string config_to_json_text(const RunConfig& config) { return config_to_json(config).dump(2); }

// ---- builders -----------------------------------------------------------------------------------

TorusSystem make_system(const SystemSpec& spec) {
  const auto d = static_cast<Eigen::Index>(spec.matrix.size());
  IntMat a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (static_cast<Eigen::Index>(spec.matrix[static_cast<std::size_t>(i)].size()) != d)
      throw Error(ErrorCode::DimensionMismatch, "matrix must be square");
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = spec.matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  Vec t(static_cast<Eigen::Index>(spec.translation.size()));
  for (std::size_t i = 0; i < spec.translation.size(); ++i) t[static_cast<Eigen::Index>(i)] = spec.translation[i];
  return TorusSystem(a, t, Perturbation(spec.perturbation), spec.magnitude, spec.name);
}

PotentialSeq make_potential(const PotentialSpec& spec) {
  auto child = [&](std::size_t i) {
    if (i >= spec.children.size()) throw Error(ErrorCode::Config, "potential '" + spec.kind + "' is missing children");
    return make_potential(spec.children[i]);
  };
  if (spec.kind == "birkhoff") return PotentialSeq::birkhoff(spec.phi);
  if (spec.kind == "cocycle_norm") return PotentialSeq::cocycle_norm(spec.value);
  if (spec.kind == "constant") return PotentialSeq::constant(spec.value);
  if (spec.kind == "sum") return PotentialSeq::sum(child(0), child(1));
  if (spec.kind == "scale") return PotentialSeq::scale(spec.value, child(0));
  if (spec.kind == "shift") return PotentialSeq::shift(spec.value, child(0));
  if (spec.kind == "twist") return PotentialSeq::coboundary_twist(child(0), child(1));
  if (spec.kind == "max") return PotentialSeq::max(child(0), child(1));
  if (spec.kind == "stage") return PotentialSeq::stage(child(0), spec.steps);
  throw Error(ErrorCode::Config, "unknown potential kind '" + spec.kind + "'");
}

TorusPoint make_base_point(const RunConfig& config) {
  Vec x(static_cast<Eigen::Index>(config.base_point.size()));
  for (std::size_t i = 0; i < config.base_point.size(); ++i) x[static_cast<Eigen::Index>(i)] = config.base_point[i];
  return TorusPoint(x);
}

PotentialSpec birkhoff_spec(TrigPolynomial phi) {
  PotentialSpec p;
  p.kind = "birkhoff";
  p.phi = std::move(phi);
  return p;
}

PotentialSpec cocycle_spec(double t) {
  PotentialSpec p;
  p.kind = "cocycle_norm";
  p.value = t;
  return p;
}

PotentialSpec constant_spec(double c) {
  PotentialSpec p;
  p.kind = "constant";
  p.value = c;
  return p;
}

TrigPolynomial cos_first_coordinate(std::size_t dim) {
  std::vector<int> wave(dim, 0);
  wave[0] = 1;
  return TrigPolynomial{0.0, {TrigTerm{0, wave, 0.0, 1.0}}};
}

// ---- presets ------------------------------------------------------------------------------------

namespace {

RunConfig base_preset(const std::string& name) {
  RunConfig c;
  c.name = name;
  c.output_dir = "out/" + name;
  return c;
}

void only(VerifySpec& v, std::initializer_list<bool VerifySpec::*> enabled) {
  v.variational = v.properties = v.power_rule = v.stage_limit = v.cover = v.oracle = false;
  for (auto flag : enabled) v.*flag = true;
}

std::map<std::string, RunConfig> build_presets() {
  std::map<std::string, RunConfig> out;
  auto add = [&](RunConfig c) { out.emplace(c.name, std::move(c)); };

  add(base_preset("catrot-entropy"));

  {
    auto c = base_preset("catrot-cocycle-line");
    c.potential = cocycle_spec(1.0);
    c.sweep = {"exponent", {-1.0, -0.5, 0.0, 0.5, 1.0}};
    add(c);
  }
  {
    auto c = base_preset("catrot-cocycle-neg");
    c.potential = cocycle_spec(-1.0);
    add(c);
  }
  {
    auto c = base_preset("catrot-certificate");
    c.potential = cocycle_spec(1.0);
    only(c.verify, {&VerifySpec::variational});
    add(c);
  }
  {
    auto c = base_preset("catrot-properties");
    c.potential = cocycle_spec(1.0);
    only(c.verify, {&VerifySpec::properties});
    add(c);
  }
  {
    auto c = base_preset("catrot-power");
    only(c.verify, {&VerifySpec::power_rule});
    add(c);
  }
  {
    auto c = base_preset("catrot-stage");
    c.potential = cocycle_spec(1.0);
    only(c.verify, {&VerifySpec::stage_limit});
    add(c);
  }
  {
    auto c = base_preset("catrot-cover");
    only(c.verify, {&VerifySpec::cover});
    add(c);
  }
  {
    auto c = base_preset("oracle");
    only(c.verify, {&VerifySpec::oracle});
    add(c);
  }
  {
    auto c = base_preset("catrot-delta");
    c.sweep = {"delta", {0.1, 0.05}};
    add(c);
  }
  {
    auto c = base_preset("perturbed-entropy");
    c.system.name = "perturbed-cat-rotation";
    c.system.perturbation = default_perturbation().terms();
    c.system.magnitude = 0.01;
    add(c);
  }
  {
    auto c = base_preset("fixed-point-only");
    c.verify.registry = {"fixed-point"};
    only(c.verify, {&VerifySpec::variational});
    add(c);
  }
  {
    auto c = base_preset("catrot-twist-subadditive");
    c.potential = cocycle_spec(1.0);
    PotentialSpec m;
    m.kind = "max";
    m.children = {birkhoff_spec(cos_first_coordinate(3)), constant_spec(0.0)};
    c.verify.property_h = m;
    only(c.verify, {&VerifySpec::properties});
    add(c);
  }
  {
    auto c = base_preset("full-suite");
    c.potential = cocycle_spec(1.0);
    add(c);
  }
  return out;
}

const std::map<std::string, RunConfig>& presets() {
  static const auto table = build_presets();
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : presets()) names.push_back(k);
  return names;
}

RunConfig preset(const std::string& name) {
  auto it = presets().find(name);
  if (it == presets().end()) fail("preset", "unknown preset '" + name + "'");
  return it->second;
}

}  // namespace upress
