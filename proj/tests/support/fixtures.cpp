#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slicead::testing {

AcmTable toy_table(const std::vector<double>& capacities_mbps) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<AcmLevel> levels;
  const int n = static_cast<int>(capacities_mbps.size());
  for (int l = 0; l < n; ++l) {
    AcmLevel lv;
    lv.capacity_mbps = capacities_mbps[static_cast<std::size_t>(l)];
    lv.up_dbm = l == n - 1 ? inf : -70.0 + 6.0 * l;
    lv.down_dbm = l == 0 ? -inf : -76.0 + 6.0 * l;
    levels.push_back(lv);
  }
  return AcmTable(levels, "toy");
}

SliceType custom_type(Service service, double demand_mbps, int duration_slots, double kappa) {
  SliceType t;
  t.id = static_cast<int>(service) * kDemandOptions;
  t.service = service;
  t.demand_mbps = demand_mbps;
  t.duration_slots = duration_slots;
  t.price = service_price(service);
  const auto seg = penalty_coefficients(kappa, t.price);
  t.penalty = PenaltyFunction({seg[0], seg[1]});
  return t;
}

SliceRequest request(int index, int arrival_slot, Service service, double demand_mbps,
                     int duration_slots, double kappa) {
  return make_request(index, arrival_slot, custom_type(service, demand_mbps, duration_slots, kappa));
}

Scenario scenario_from_levels(const AcmTable& table, const std::vector<int>& levels,
                              std::vector<SliceRequest> requests, double delta) {
  Scenario s;
  s.name = "fixture";
  s.table = table;
  for (int l : levels) s.capacity.push_back({l, table.capacity(l)});
  std::stable_sort(requests.begin(), requests.end(),
                   [](const SliceRequest& a, const SliceRequest& b) { return a.arrival_slot < b.arrival_slot; });
  for (std::size_t i = 0; i < requests.size(); ++i) requests[i].index = static_cast<int>(i);
  s.requests = std::move(requests);
  s.delta = delta;
  s.validate();
  return s;
}

Scenario random_small_scenario(std::mt19937_64& rng, const RandomScenarioLimits& limits) {
  std::uniform_int_distribution<int> level_count(2, limits.max_levels);
  const int L = level_count(rng);
  std::vector<double> caps{0.0};
  for (int l = 1; l < L; ++l) caps.push_back(caps.back() + std::uniform_real_distribution<double>(8.0, 25.0)(rng));
  const AcmTable table = toy_table(caps);

  const int horizon = std::uniform_int_distribution<int>(20, limits.max_horizon)(rng);
  std::vector<int> levels;
  int level = L - 1;
  for (int t = 0; t < horizon; ++t) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (u < 0.15 && level > 0) --level;
    else if (u > 0.8 && level < L - 1) ++level;
    levels.push_back(level);
  }

  const int n = std::uniform_int_distribution<int>(1, limits.max_requests)(rng);
  const double demands[] = {2.0, 5.0, 8.8, 12.0, 19.2};
  std::vector<SliceRequest> reqs;
  for (int i = 0; i < n; ++i) {
    const auto service = static_cast<Service>(std::uniform_int_distribution<int>(0, 2)(rng));
    const double d = demands[std::uniform_int_distribution<int>(0, 4)(rng)];
    const int dur = std::uniform_int_distribution<int>(2, std::min(15, horizon))(rng);
    const int arrival = std::uniform_int_distribution<int>(0, horizon - dur)(rng);
    reqs.push_back(request(i, arrival, service, d, dur));
  }
  return scenario_from_levels(table, levels, std::move(reqs));
}

double reference_penalty(const std::vector<PenaltySegment>& segments, double f) {
  double p = 0.0;
  for (const PenaltySegment& s : segments) p = std::max(p, s.slope * (1.0 - f) + s.intercept);
  return p;
}

std::vector<GridSlice> RateInstance::grid_slices() const {
  std::vector<GridSlice> out;
  for (const SliceType& t : types) {
    const auto seg = penalty_coefficients(kDefaultKappa, service_price(t.service));
    out.push_back({t.demand_mbps, {seg[0], seg[1]}});
  }
  return out;
}

RateInstance random_rate_instance(std::mt19937_64& rng, int max_slices) {
  RateInstance inst;
  const int n = std::uniform_int_distribution<int>(1, max_slices)(rng);
  std::uniform_real_distribution<double> demand(0.5, 30.0);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto service = static_cast<Service>(std::uniform_int_distribution<int>(0, 2)(rng));
    inst.types.push_back(custom_type(service, demand(rng), 1));
    total += inst.types.back().demand_mbps;
  }
  inst.capacity_mbps = std::uniform_real_distribution<double>(0.0, total)(rng);
  return inst;
}

namespace {

double brute(const std::vector<GridSlice>& slices, std::size_t i, double left, int steps) {
  const GridSlice& s = slices[i];
  if (i + 1 == slices.size()) {
    const int k = std::min(steps, static_cast<int>(std::floor(left / s.demand_mbps * steps + 1e-9)));
    return reference_penalty(s.segments, static_cast<double>(k) / steps);
  }
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= steps; ++k) {
    const double f = static_cast<double>(k) / steps;
    const double use = s.demand_mbps * f;
    if (use > left + 1e-9) break;
    best = std::min(best, reference_penalty(s.segments, f) + brute(slices, i + 1, left - use, steps));
  }
  return best;
}

}  // namespace

double grid_brute_force(const std::vector<GridSlice>& slices, double capacity_mbps, int steps) {
  if (slices.empty()) return 0.0;
  return brute(slices, 0, capacity_mbps, steps);
}

double grid_dual_bound(const std::vector<GridSlice>& slices, double capacity_mbps, int steps) {
  std::vector<double> mus{0.0};
  for (const GridSlice& s : slices)
    for (const PenaltySegment& seg : s.segments) mus.push_back(seg.slope / s.demand_mbps);
  double best = -std::numeric_limits<double>::infinity();
  for (double mu : mus) {
    double value = -mu * capacity_mbps;
    for (const GridSlice& s : slices) {
      double m = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= steps; ++k) {
        const double f = static_cast<double>(k) / steps;
        m = std::min(m, reference_penalty(s.segments, f) + mu * s.demand_mbps * f);
      }
      value += m;
    }
    best = std::max(best, value);
  }
  return best;
}

}  // namespace slicead::testing
