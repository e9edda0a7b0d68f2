#pragma once

#include "upress/pressure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace upress {

inline constexpr double kEstimateTol = 0.03;

struct LogSumResult {
  double lhs = 0.0;  // sum p_i (a_i - log p_i), with 0 log 0 = 0
  double rhs = 0.0;  // log sum e^{a_i}
  std::vector<double> gibbs;
};

/// Both sides of sum p_i (a_i - log p_i) <= log sum e^{a_i} and the weights attaining equality.
/// Throws DimensionMismatch or NotProbability on bad input, CheckFailed if lhs > rhs + 1e-12.
LogSumResult log_sum_inequality(const std::vector<double>& p, const std::vector<double>& a);

/// Pressure of potentials whose log g_n is n * a for every x on a linear system: hu(Haar) + a.
std::optional<double> analytic_pressure(const PotentialSeq& g, const TorusSystem& sys);

/// Haar volume plus a fixed-point measure: the Dirac mass at 0 when 0 is fixed, else the center
/// circle over the factor fixed point 0 when the system has an isometric center coordinate.
std::vector<MeasureEntry> default_registry(const TorusSystem& sys, int haar_samples = 2000, std::uint64_t seed = 1);

enum class Verdict { CertifiedEqual, InequalityOnly, Violation };
std::string_view verdict_name(Verdict v);

struct VariationalCandidate {
  MeasureEntry measure;
  LyapunovEstimate lyapunov;
  std::optional<double> sum;  // hu + G_+; empty for -infinity or uncertified entries
  bool certified = false;
};

struct VariationalReport {
  double pressure_estimate = 0.0;
  std::vector<VariationalCandidate> candidates;
  std::optional<double> best_sum;
  double gap = 0.0;
  Verdict verdict = Verdict::InequalityOnly;
  double tolerance = kEstimateTol;
  /// hu + G_+ <= estimate + tolerance for every certified candidate.
  bool one_sided_safe = true;
};

VariationalReport variational_certificate(const TorusSystem& sys, const PotentialSeq& g,
                                          const std::vector<MeasureEntry>& registry, double pressure_estimate,
                                          const std::vector<int>& stages = {2, 4, 8, 16},
                                          double tolerance = kEstimateTol, int jobs = 1);

struct PropertyItem {
  int item = 0;
  std::string name;
  std::string level;  // "row" or "estimate"
  bool supported = true;
  bool pass = false;
  double defect = 0.0;  // worst measured violation, <= 0 when the law holds with room
  double tolerance = 0.0;
  std::string note;
};

struct PropertyReport {
  std::vector<PropertyItem> items;
  bool pass = false;  // every supported item passes
};

inline constexpr double kExactTol = 1e-9;
inline constexpr double kShiftEstimateTol = 0.02;

/// Items (1)-(6) of the pressure algebra on one grid: exact row identities or row inequalities for
/// (1)-(5) and estimate-level agreement for (6), which needs an additive H.
PropertyReport check_properties(const TorusSystem& sys, const PotentialSeq& g, const PotentialSeq& h, double c,
                                 double p, const TorusPoint& x, const PressureParams& params,
                                 double tolerance = kEstimateTol);

struct PowerRuleReport {
  int k = 0;
  double estimate_1 = 0.0;
  double estimate_k = 0.0;
  double defect = 0.0;  // |estimate_k - k estimate_1|
  double tolerance = 0.0;
  int n_max_k = 0;
  double hu_1 = 0.0;
  double hu_k = 0.0;
  double hu_defect = 0.0;
  bool pass = false;
};

/// Pressure of G^(k) under f^k against k times the pressure under f. n_max is lowered for f^k
/// until the density rule fits the sample budget.
PowerRuleReport power_rule_check(const TorusSystem& sys, const PotentialSeq& g, int k, const TorusPoint& x,
                                 const PressureParams& params, double tolerance = kEstimateTol);

struct StageLimitReport {
  std::vector<int> stages;
  std::vector<double> values;
  double estimate = 0.0;
  double tolerance = 0.0;
  std::optional<double> analytic;
  double worst_below = 0.0;    // max of estimate - value
  double worst_increase = 0.0; // max rise along the doubling stages
  std::optional<double> last_gap;
  bool above_estimate = false;
  bool doubling_nonincreasing = false;
  bool last_close = true;
  /// Full-sequence monotonicity is logged, not asserted.
  bool full_sequence_nonincreasing = false;
  bool pass = false;
};

inline constexpr double kStageTol = 0.02;
inline constexpr double kStageLastTol = 0.05;

StageLimitReport stage_limit_check(const TorusSystem& sys, const PotentialSeq& g, const std::vector<int>& stages,
                                   const TorusPoint& x, const PressureParams& params, double tolerance = kStageTol);

}  // namespace upress
