#pragma once

#include "upress/config.hpp"
#include "upress/error.hpp"

#include <optional>
#include <string>
#include <vector>

namespace upress {

/// Process exit codes shared by the library runners and the CLI.
enum class ExitCode { Ok = 0, Internal = 1, Usage = 2, Refused = 3, CheckFailed = 4 };

ExitCode exit_code_for(ErrorCode code);

struct RunOutcome {
  ExitCode code = ExitCode::Ok;
  std::string reason;   // machine-readable; empty on success
  std::string message;  // human-readable detail
  std::vector<std::string> files;
  std::optional<double> estimate;  // estimate runs only
};

/// Registry entries named in the config ("haar", "fixed-point").
std::vector<MeasureEntry> build_registry(const TorusSystem& sys, const VerifySpec& verify, std::uint64_t seed);

struct OracleRun {
  int instances = 0;
  int packing_mismatches = 0;
  int covering_mismatches = 0;
  int greedy_above_dp = 0;
  double max_defect = 0.0;
  bool pass = false;
};

/// DP against exhaustive enumeration on random sorted samples of the config leaf; sample sizes
/// stay at or below max_m. Instance i draws from item_rng(seed, i).
OracleRun oracle_suite(const TorusSystem& sys, const TorusPoint& x, double delta, int instances, int max_m,
                       std::uint64_t seed);

/// Each runner validates the config, writes its files under config.output_dir and never throws:
/// failures become error.json plus a typed outcome.
RunOutcome run_estimate(const RunConfig& config);
RunOutcome run_verify(const RunConfig& config);
RunOutcome run_sweep(const RunConfig& config);
RunOutcome run_oracle(const RunConfig& config);

/// Writes error.json under `dir`; the runners use it for their own failures.
void write_error_report(const std::string& dir, const std::string& command, ExitCode code, const std::string& reason,
                        const std::string& message);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& text);

}  // namespace upress
