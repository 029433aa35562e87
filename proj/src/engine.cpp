#include "slicead/engine.hpp"

#include <algorithm>

#include "json.hpp"
#include "slicead/csv.hpp"
#include "slicead/error.hpp"
#include "slicead/rate_control.hpp"

namespace slicead {

std::vector<std::uint8_t> SimulationResult::admission_vector() const {
  std::vector<std::uint8_t> z;
  z.reserve(requests.size());
  for (const RequestRecord& r : requests) z.push_back(r.admitted ? 1 : 0);
  return z;
}

int SimulationResult::admitted() const {
  return static_cast<int>(std::count_if(requests.begin(), requests.end(),
                                        [](const RequestRecord& r) { return r.admitted; }));
}

SimulationResult run(const Scenario& scenario, AdmissionPolicy& policy, const Forecaster* forecaster,
                     std::uint64_t seed, const EngineOptions& options) {
  if (scenario.horizon() < 1) throw Error(ErrorCode::kInvalidArgument, "scenario horizon must be >= 1");
  if (policy.needs_forecast() && forecaster == nullptr && scenario.rsl) {
    throw Error(ErrorCode::kForecastMissing, "policy " + policy.name() + " needs a forecaster");
  }
  Rng rng(seed);
  SimulationResult res;
  res.scenario = scenario.name;
  res.policy = policy.name();
  res.seed = seed;
  const auto& reqs = scenario.requests;
  for (const SliceRequest& r : reqs) res.requests.push_back({r.index, false, r.reward, 0.0});

  const int horizon = forecaster != nullptr ? forecaster->horizon() : kDefaultHorizon;
  std::vector<double> rsl;
  if (scenario.rsl) rsl = scenario.rsl->values();

  std::vector<SliceRequest> active;
  std::size_t next = 0;
  for (int t = 0; t < scenario.horizon(); ++t) {
    const CapacitySample cap = scenario.capacity[static_cast<std::size_t>(t)];
    SlotRecord rec;
    rec.t = t;
    rec.level = cap.level;
    rec.capacity_mbps = cap.capacity_mbps;

    std::erase_if(active, [&](const SliceRequest& r) { return r.end_slot() <= t; });
    const std::size_t first = next;
    while (next < reqs.size() && reqs[next].arrival_slot == t) ++next;
    const std::span<const SliceRequest> arrivals(reqs.data() + first, next - first);
    rec.arrivals = static_cast<int>(arrivals.size());

    if (!active.empty()) {
      rec.gate_closed = allocate(rate_slices(active), cap.capacity_mbps).total_penalty >= scenario.delta;
    }

    if (!arrivals.empty() && (!rec.gate_closed || policy.bypasses_gate())) {
      PolicyContext ctx;
      ctx.slot = t;
      ctx.active = active;
      ctx.arrivals = arrivals;
      ctx.capacity_mbps = cap.capacity_mbps;
      ctx.level = cap.level;
      ctx.table = &scenario.table;
      ctx.rng = &rng;
      ctx.horizon = horizon;
      CapacityPmf pmf;
      if (policy.needs_forecast()) {
        if (scenario.rsl && forecaster != nullptr) {
          const std::size_t end = static_cast<std::size_t>(t) + 1;
          const std::size_t begin = end > static_cast<std::size_t>(options.lookback)
                                        ? end - static_cast<std::size_t>(options.lookback)
                                        : 0;
          const GaussianForecast fc =
              forecaster->forecast(t, std::span<const double>(rsl.data() + begin, end - begin));
          pmf = capacity_pmf_horizon(cap.level, fc, scenario.table);
        } else {
          pmf = CapacityPmf::point_mass(cap.level, scenario.table.size(), horizon);
        }
        ctx.pmf = &pmf;
        ctx.horizon = pmf.horizon();
      }
      const Admitted admitted = policy.decide(ctx);
      for (int idx : admitted) {
        const SliceRequest& r = reqs.at(static_cast<std::size_t>(idx));
        if (r.arrival_slot != t) {
          throw Error(ErrorCode::kInvalidArgument, "policy admitted a request outside the batch");
        }
        res.requests[static_cast<std::size_t>(idx)].admitted = true;
        res.total_reward += r.reward;
        active.push_back(r);
      }
      rec.admitted_count = static_cast<int>(admitted.size());
    }

    for (const SliceRequest& r : active) rec.active_demand_mbps += r.demand();
    if (!active.empty()) {
      const Allocation a = allocate(rate_slices(active), cap.capacity_mbps);
      for (std::size_t k = 0; k < active.size(); ++k) {
        res.requests[static_cast<std::size_t>(active[k].index)].penalty += a.penalties[k];
        rec.allocated_mbps += a.fractions[k] * active[k].demand();
      }
      rec.penalty = a.total_penalty;
      res.total_penalty += a.total_penalty;
    }
    res.slots.push_back(rec);
  }
  res.revenue = res.total_reward - res.total_penalty;
  return res;
}

MetricsReport metrics(const SimulationResult& result, const SimulationResult* baseline,
                      const SimulationResult& admit_all, double cv) {
  MetricsReport m;
  m.revenue = result.revenue;
  if (baseline != nullptr && baseline->revenue != 0.0) m.normalized_revenue = result.revenue / baseline->revenue;
  m.admitted = result.admitted();
  m.requests = static_cast<int>(result.requests.size());
  int negative = 0;
  for (const RequestRecord& r : result.requests) {
    if (r.admitted && r.penalty > r.reward) ++negative;
  }
  m.negative_revenue_share = m.admitted > 0 ? static_cast<double>(negative) / m.admitted : 0.0;
  int under = 0;
  for (const SlotRecord& s : admit_all.slots) {
    if (s.capacity_mbps < s.active_demand_mbps) ++under;
  }
  m.underprovisioning_fraction =
      admit_all.slots.empty() ? 0.0 : static_cast<double>(under) / static_cast<double>(admit_all.slots.size());
  m.cv = cv;
  return m;
}

std::string slots_to_csv(const SimulationResult& result) {
  std::string out = "t,capacity,active_demand,penalty,admitted_count\n";
  for (const SlotRecord& s : result.slots) {
    out += std::to_string(s.t) + ',' + csv::format_double(s.capacity_mbps) + ',' +
           csv::format_double(s.active_demand_mbps) + ',' + csv::format_double(s.penalty) + ',' +
           std::to_string(s.admitted_count) + '\n';
  }
  return out;
}

std::string summary_json(const SimulationResult& result, const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["scenario"] = result.scenario;
  j["policy"] = result.policy;
  j["seed"] = result.seed;
  j["slots"] = result.slots.size();
  j["requests"] = report.requests;
  j["admitted"] = report.admitted;
  j["total_reward"] = result.total_reward;
  j["total_penalty"] = result.total_penalty;
  j["revenue"] = result.revenue;
  j["normalized_revenue"] = report.normalized_revenue ? nlohmann::ordered_json(*report.normalized_revenue)
                                                      : nlohmann::ordered_json(nullptr);
  j["negative_revenue_share"] = report.negative_revenue_share;
  j["underprovisioning_fraction"] = report.underprovisioning_fraction;
  j["cv"] = report.cv;
  std::vector<int> admitted;
  for (const RequestRecord& r : result.requests) {
    if (r.admitted) admitted.push_back(r.index);
  }
  j["admitted_indices"] = admitted;
  return j.dump(2) + '\n';
}

TrainingReport train_q_learner(QLearner& learner, const std::vector<Scenario>& scenarios,
                               const Forecaster* forecaster, std::uint64_t seed,
                               const EngineOptions& options) {
  TrainingReport rep;
  QLearningPolicy policy(std::shared_ptr<QLearner>(&learner, [](QLearner*) {}));
  std::uint64_t run_seed = seed;
  bool progress = true;
  while (!scenarios.empty() && progress && !learner.converged() && !learner.exhausted()) {
    const std::int64_t before = learner.updates();
    for (const Scenario& sc : scenarios) {
      const SimulationResult r = run(sc, policy, forecaster, run_seed++, options);
      rep.curve.push_back({learner.updates(), learner.window_mean(), learner.epsilon(), r.revenue});
      if (learner.converged() || learner.exhausted()) break;
    }
    ++rep.passes;
    progress = learner.updates() > before;
  }
  rep.converged = learner.converged();
  learner.freeze();
  return rep;
}

std::string training_curve_to_csv(const TrainingReport& report) {
  std::string out = "run,updates,window_mean_delta,epsilon,revenue\n";
  for (std::size_t i = 0; i < report.curve.size(); ++i) {
    const TrainingPoint& p = report.curve[i];
    out += std::to_string(i) + ',' + std::to_string(p.updates) + ',' + csv::format_double(p.window_mean) + ',' +
           csv::format_double(p.epsilon) + ',' + csv::format_double(p.revenue) + '\n';
  }
  return out;
}

}  // namespace slicead
