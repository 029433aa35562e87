#include "slicead/suite.hpp"

#include <random>

#include "slicead/error.hpp"

namespace slicead {

int cv_bucket_index(double cv, std::array<double, 2> edges) {
  if (cv < edges[0]) return 0;
  if (cv <= edges[1]) return 1;
  return 2;
}

std::string cv_bucket(double cv, std::array<double, 2> edges) {
  auto fmt = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return s;
  };
  switch (cv_bucket_index(cv, edges)) {
    case 0:
      return "<" + fmt(edges[0]);
    case 1:
      return "[" + fmt(edges[0]) + "," + fmt(edges[1]) + "]";
    default:
      return ">" + fmt(edges[1]);
  }
}

RslTrace synthetic_trace_for_bucket(int bucket, int slots, std::uint64_t seed) {
  if (bucket < 0 || bucket > 2) throw Error(ErrorCode::kInvalidArgument, "bucket must be 0, 1 or 2");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 500; ++attempt) {
    SyntheticRslParams p;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int per_hour = std::max(1, slots / 60);
    if (bucket == 0) {
      p.baseline_dbm = -50.0 + 5.0 * u(rng);
      p.noise_std_db = 0.3;
      p.event_count = static_cast<int>(u(rng) * 2.0);
      p.event_depth_db = 2.0 + 3.0 * u(rng);
    } else if (bucket == 1) {
      p.baseline_dbm = -30.0 + 8.0 * u(rng);
      p.noise_std_db = 0.5;
      p.event_count = 2 * per_hour;
      p.event_depth_db = 12.0 + 8.0 * u(rng);
    } else {
      p.baseline_dbm = -10.0 + 4.0 * u(rng);
      p.noise_std_db = 0.5;
      p.event_count = 2 * per_hour;
      p.event_depth_db = 45.0 + 20.0 * u(rng);
    }
    p.event_duration_min = 20 + static_cast<int>(u(rng) * 20.0);
    const RslTrace trace = generate_synthetic_rsl(p, slots, rng(), "synthetic-" + std::to_string(bucket));
    if (cv_bucket_index(scenario_cv(trace)) == bucket) return trace;
  }
  throw Error(ErrorCode::kInvalidArgument, "could not reach the requested CV bucket");
}

std::vector<SliceRequest> clip_to_horizon(std::vector<SliceRequest> requests, int horizon) {
  std::vector<SliceRequest> out;
  for (SliceRequest& r : requests) {
    if (r.end_slot() > horizon) continue;
    r.index = static_cast<int>(out.size());
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Scenario> generate_cv_suite(const SuiteOptions& options) {
  std::vector<Scenario> out;
  const SliceCatalog catalog = SliceCatalog::canned(options.kappa);
  const AcmTable table = AcmTable::load(options.table);
  std::mt19937_64 seeds(options.seed);
  for (int bucket = 0; bucket < 3; ++bucket) {
    for (int k = 0; k < options.per_bucket; ++k) {
      const std::uint64_t trace_seed = seeds();
      const std::uint64_t flow_seed = seeds();
      const RslTrace trace = synthetic_trace_for_bucket(bucket, options.slots, trace_seed);
      SyntheticFlowParams fp = options.flows;
      fp.slots = options.slots;
      const auto flows = generate_synthetic_flows(fp, flow_seed);
      auto requests = clip_to_horizon(generate_slice_requests(flows, catalog), options.slots);
      out.push_back(make_scenario("cv" + std::to_string(bucket) + "-" + std::to_string(k), trace, table,
                                  std::move(requests)));
    }
  }
  return out;
}

}  // namespace slicead
