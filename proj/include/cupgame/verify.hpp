#pragma once

#include "cupgame/harness.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cupgame {

enum class SuiteScale { Fast, Full };
SuiteScale parse_suite(std::string_view name);

struct VerifyOptions {
  SuiteScale scale = SuiteScale::Fast;
  int workers = 0;
  /// Passed to the threshold emptiers; "counter_drift" is a deliberate bug.
  std::string fault = "none";
  std::ostream* progress = nullptr;
};

struct CheckResult {
  std::string id;
  std::string title;
  bool passed = false;
  std::string detail;
  std::optional<ViolationReport> violation;
  double seconds = 0;
};

/// Check ids in suite order.
std::vector<std::string> check_ids();

/// Runs named checks at the chosen scale. The witness check reuses the
/// threshold-emptier runs of the sandwich and constant-backlog checks.
class VerifySession {
 public:
  explicit VerifySession(VerifyOptions opts) : opts_(std::move(opts)) {}
  CheckResult run(const std::string& id);
  std::vector<CheckResult> run_all();

  // Individual checks.
  CheckResult counter_sandwich();
  CheckResult offset_mod_one();
  CheckResult harmonic_average_bound();
  CheckResult universal_lower_bound_check();
  CheckResult crossing_probability();
  CheckResult constant_backlog();
  CheckResult potential_case1();
  CheckResult witness_contrapositive();
  CheckResult recovery();
  CheckResult separation();

  /// Measured values from the last run of each check, for reports.
  struct Measurements {
    std::optional<double> crossing_offset_route;
    std::optional<double> crossing_threshold_route;
    std::optional<double> tail_fraction_small_p;
    std::optional<double> tail_fraction_large_p;
    std::optional<Rational> universal_backlog;
    std::optional<Rational> universal_bound;
    std::optional<Rational> separation_deterministic;
    std::optional<double> separation_smoothed_median;
  };
  const Measurements& measurements() const { return m_; }

 private:
  struct WitnessTally {
    std::int64_t checked = 0;
    std::optional<ViolationReport> violation;
    bool ran = false;
  };
  ExperimentResult run_logged(const std::string& label, const ExperimentSpec& spec);
  void tally_witness(const ExperimentResult& r, WitnessTally& t);
  bool full() const { return opts_.scale == SuiteScale::Full; }

  VerifyOptions opts_;
  WitnessTally sandwich_witness_;
  WitnessTally backlog_witness_;
  Measurements m_;
};

/// One line per result; returns the process exit code (0 or 2).
int report_checks(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace cupgame
