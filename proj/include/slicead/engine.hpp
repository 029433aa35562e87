#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slicead/forecast.hpp"
#include "slicead/policies.hpp"
#include "slicead/scenario.hpp"

namespace slicead {

struct SlotRecord {
  int t = 0;
  int level = 0;
  double capacity_mbps = 0.0;
  double active_demand_mbps = 0.0;  // after this slot's admissions
  double allocated_mbps = 0.0;
  double penalty = 0.0;
  int admitted_count = 0;
  int arrivals = 0;
  bool gate_closed = false;
};

struct RequestRecord {
  int index = 0;
  bool admitted = false;
  double reward = 0.0;
  double penalty = 0.0;  // cumulative over the request's active slots
};

struct SimulationResult {
  std::string scenario;
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<SlotRecord> slots;
  std::vector<RequestRecord> requests;
  double total_reward = 0.0;
  double total_penalty = 0.0;
  double revenue = 0.0;

  std::vector<std::uint8_t> admission_vector() const;
  int admitted() const;
};

struct EngineOptions {
  int lookback = kDefaultLookback;
};

// `forecaster` may be null for policies that do not use forecasts. Without
// an RSL trace the capacity PMF is a point mass on the current level.
SimulationResult run(const Scenario& scenario, AdmissionPolicy& policy, const Forecaster* forecaster,
                     std::uint64_t seed, const EngineOptions& options = {});

struct MetricsReport {
  double revenue = 0.0;
  std::optional<double> normalized_revenue;
  double negative_revenue_share = 0.0;
  double underprovisioning_fraction = 0.0;
  double cv = 0.0;
  int admitted = 0;
  int requests = 0;
};

MetricsReport metrics(const SimulationResult& result, const SimulationResult* baseline,
                      const SimulationResult& admit_all, double cv);

// `t,capacity,active_demand,penalty,admitted_count`
std::string slots_to_csv(const SimulationResult& result);
std::string summary_json(const SimulationResult& result, const MetricsReport& report);

struct TrainingPoint {
  std::int64_t updates = 0;
  double window_mean = 0.0;
  double epsilon = 0.0;
  double revenue = 0.0;
};

struct TrainingReport {
  std::vector<TrainingPoint> curve;  // one point per scenario run
  bool converged = false;
  int passes = 0;
};

// Online passes over the scenarios in order until the learner converges or
// exhausts its update budget; the learner is frozen afterwards.
TrainingReport train_q_learner(QLearner& learner, const std::vector<Scenario>& scenarios,
                               const Forecaster* forecaster, std::uint64_t seed,
                               const EngineOptions& options = {});
std::string training_curve_to_csv(const TrainingReport& report);

}  // namespace slicead
