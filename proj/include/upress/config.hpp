#pragma once

#include "upress/cover.hpp"
#include "upress/pressure.hpp"
#include "upress/variational.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace upress {

/// x -> A x + translation + magnitude * P(x); P given by its trigonometric modes.
struct SystemSpec {
  std::string name = "cat-rotation";
  std::vector<std::vector<int>> matrix{{2, 1, 0}, {1, 1, 0}, {0, 0, 1}};
  std::vector<double> translation{0.0, 0.0, kGoldenRotation};
  std::vector<TrigTerm> perturbation;
  double magnitude = 0.0;

  bool operator==(const SystemSpec&) const = default;
};

/// Potential expression: kind tag plus parameters. Kinds: birkhoff(phi), cocycle_norm(value),
/// constant(value), sum(a, b), scale(value, a), shift(value, a), twist(a, b), max(a, b), stage(a, steps).
struct PotentialSpec {
  std::string kind = "constant";
  double value = 0.0;
  int steps = 0;
  TrigPolynomial phi;
  std::vector<PotentialSpec> children;

  bool operator==(const PotentialSpec&) const = default;
};

struct VerifySpec {
  bool variational = true;
  bool properties = true;
  bool power_rule = true;
  bool stage_limit = true;
  bool cover = true;
  bool oracle = true;
  std::vector<std::string> registry{"haar", "fixed-point"};
  int haar_samples = 2000;
  std::vector<int> lyapunov_stages{2, 4, 8, 16};
  /// H for the algebra checks; defaults to the Birkhoff sums of cos(2 pi x_1) on T^3.
  PotentialSpec property_h{"birkhoff", 0.0, 0, TrigPolynomial{0.0, {TrigTerm{0, {1, 0, 0}, 0.0, 1.0}}}, {}};
  double shift_c = 0.5;
  double convex_p = 0.5;
  int power_k = 2;
  std::vector<int> stages{1, 2, 4, 8};
  std::vector<double> cover_epsilons{0.02, 0.01};  // cover intervals of length 2 eps
  int cover_n_max = 5;

  bool operator==(const VerifySpec&) const = default;
};

struct SweepSpec {
  std::string axis = "exponent";  // epsilon | delta | n | magnitude | exponent
  std::vector<double> values;

  bool operator==(const SweepSpec&) const = default;
};

struct OracleSpec {
  int instances = 200;
  int max_m = 18;

  bool operator==(const OracleSpec&) const = default;
};

struct RunConfig {
  std::string name = "custom";
  SystemSpec system;
  PotentialSpec potential;
  std::vector<double> base_point{0.3, 0.2, 0.1};
  PressureParams pressure;
  std::uint64_t seed = 1;
  double tolerance = kEstimateTol;
  VerifySpec verify;
  SweepSpec sweep;
  OracleSpec oracle;
  std::string output_dir = "out";

  bool operator==(const RunConfig&) const = default;
};

inline constexpr int kSchemaVersion = 1;

/// Plain-text structured config (YAML); JSON is accepted as well. Throws Config with the field path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// YAML with every double in its shortest round-trip form, so parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& config);
/// The same tree as indented JSON, for report echoes.
std::string config_to_json_text(const RunConfig& config);

/// Throws Config naming the first field that violates a module precondition.
void validate_config(const RunConfig& config);

std::vector<std::string> preset_names();
/// Throws Config for unknown names.
RunConfig preset(const std::string& name);

PotentialSpec birkhoff_spec(TrigPolynomial phi);
PotentialSpec cocycle_spec(double t);
PotentialSpec constant_spec(double c);
/// cos(2 pi x_1) as a scalar trigonometric polynomial in dimension `dim`.
TrigPolynomial cos_first_coordinate(std::size_t dim);

TorusSystem make_system(const SystemSpec& spec);
PotentialSeq make_potential(const PotentialSpec& spec);
TorusPoint make_base_point(const RunConfig& config);

}  // namespace upress
