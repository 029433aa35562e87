#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "slicead/link_capacity.hpp"
#include "slicead/scenario.hpp"
#include "slicead/slicing.hpp"

namespace slicead::testing {

// Evenly spaced hysteresis table with the given capacities in Mbps.
AcmTable toy_table(const std::vector<double>& capacities_mbps);

SliceType custom_type(Service service, double demand_mbps, int duration_slots,
                      double kappa = kDefaultKappa);
SliceRequest request(int index, int arrival_slot, Service service, double demand_mbps,
                     int duration_slots, double kappa = kDefaultKappa);

// Scenario over an explicit level series; requests are renumbered.
Scenario scenario_from_levels(const AcmTable& table, const std::vector<int>& levels,
                              std::vector<SliceRequest> requests, double delta = kDefaultDelta);

struct RandomScenarioLimits {
  int max_requests = 12;
  int max_horizon = 60;
  int max_levels = 4;
};

// Small instance with a random capacity walk on a toy table and requests
// that all end within the horizon.
Scenario random_small_scenario(std::mt19937_64& rng, const RandomScenarioLimits& limits = {});

// P(f) straight from the segment list, independent of PenaltyFunction.
double reference_penalty(const std::vector<PenaltySegment>& segments, double f);

// A rate-control instance described only by demands and raw segments.
struct GridSlice {
  double demand_mbps = 0.0;
  std::vector<PenaltySegment> segments;
};

struct RateInstance {
  std::vector<SliceType> types;
  double capacity_mbps = 0.0;

  std::vector<GridSlice> grid_slices() const;
};

// Up to `max_slices` slices with the default penalty shapes and a capacity
// below the total demand.
RateInstance random_rate_instance(std::mt19937_64& rng, int max_slices = 6);

// Best total penalty over fraction vectors on a grid of step 1/steps with
// sum d*f <= C. Exponential in the slice count; meant for two or three slices.
double grid_brute_force(const std::vector<GridSlice>& slices, double capacity_mbps, int steps = 1000);

// max over mu of  sum_i min_k [P_i(k/steps) + mu d_i k/steps] - mu C,  which
// never exceeds the grid optimum.
double grid_dual_bound(const std::vector<GridSlice>& slices, double capacity_mbps, int steps = 1000);

}  // namespace slicead::testing
