#pragma once

// Command implementations behind the slicead executable. Each returns a
// process exit code: 0 success, 1 runtime failure, 2 invalid configuration.

#include <array>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "slicead/config.hpp"
#include "slicead/engine.hpp"
#include "slicead/oracle.hpp"
#include "slicead/suite.hpp"

namespace slicead {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

// From the bundle, or a single scenario assembled from the path fields.
std::vector<Scenario> load_scenarios(const RunConfig& config);

// Naive persistence forecaster calibrated on the scenarios' RSL traces (or
// the calibration file), optionally behind imported forecasts.
std::shared_ptr<const Forecaster> make_forecaster(const RunConfig& config,
                                                  const std::vector<Scenario>& scenarios);

// Q-learning policies load `paths.qtable` when set, otherwise they are
// trained on `training` first. The returned policy is frozen.
std::unique_ptr<AdmissionPolicy> make_policy(const std::string& name, const RunConfig& config,
                                             const std::vector<Scenario>& training,
                                             const Forecaster* forecaster);

struct SweepSpec {
  std::vector<std::string> policies;
  std::array<double, 2> cv_edges = kDefaultCvEdges;
  int workers = 1;
  int suite_per_bucket = 0;  // > 0 generates a synthetic suite instead of loading scenarios
  int suite_slots = 240;
};

struct SweepRow {
  std::string scenario;
  std::string policy;
  std::string kind;  // "data" or "reference"
  double cv = 0.0;
  std::string cv_bucket;
  std::optional<MetricsReport> metrics;
  std::string error;
};

std::vector<SweepRow> run_sweep(const std::vector<Scenario>& scenarios, const RunConfig& config,
                                const SweepSpec& spec);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, const SweepSpec& spec, std::ostream& out, std::ostream& err);
int cmd_oracle(const RunConfig& config, OracleMode mode, std::ostream& out, std::ostream& err);
int cmd_train_pql(const RunConfig& config, bool predictive, int suite_per_bucket, std::ostream& out,
                  std::ostream& err);
int cmd_calibrate(const std::vector<std::string>& rsl_paths, int horizon, const std::string& output,
                  std::ostream& out, std::ostream& err);

}  // namespace slicead
