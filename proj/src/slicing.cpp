#include "slicead/slicing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <limits>
#include <random>

#include "slicead/csv.hpp"
#include "slicead/error.hpp"

namespace slicead {

namespace {

constexpr std::string_view kFlowHeader = "start_slot,duration_slots,throughput_mbps,service";
constexpr std::string_view kSrHeader =
    "index,arrival_slot,type_id,service,demand_mbps,duration_slots,reward";
constexpr std::string_view kCatalogHeader = "type_id,service,demand_mbps,duration_slots";

constexpr int kMinFlowsPerService = 20;
constexpr double kDemandScale = 4.0;
constexpr std::array<double, kDemandOptions> kDemandPercentiles{25.0, 50.0, 75.0, 95.0};
constexpr double kDurationPercentile = 90.0;
constexpr double kFitTolerance = 1e-9;

// Linear interpolation between order statistics.
double percentile(std::vector<double> values, double pct) {
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace

std::string_view service_name(Service s) {
  switch (s) {
    case Service::kURLLC: return "URLLC";
    case Service::kEMBB: return "eMBB";
    case Service::kBE: return "BE";
  }
  return "?";
}

Service parse_service(std::string_view name) {
  if (name == "URLLC") return Service::kURLLC;
  if (name == "eMBB") return Service::kEMBB;
  if (name == "BE") return Service::kBE;
  throw Error(ErrorCode::kUnknownService, "unknown service '" + std::string(name) + "'");
}

double service_price(Service s) {
  switch (s) {
    case Service::kURLLC: return 10.0;
    case Service::kEMBB: return 5.0;
    case Service::kBE: return 2.5;
  }
  return 0.0;
}

std::array<PenaltySegment, 2> penalty_coefficients(double kappa, double price) {
  if (!(kappa > 0.0) || !(price > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "kappa and price must be positive");
  }
  const double k = kappa * price;
  return {PenaltySegment{3.0 * k, -k}, PenaltySegment{k, 0.0}};
}

PenaltyFunction::PenaltyFunction(std::vector<PenaltySegment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) throw Error(ErrorCode::kInvalidArgument, "penalty needs a segment");
  for (const PenaltySegment& s : segments_) {
    if (!(s.slope >= 0.0) || !(s.intercept <= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "penalty segments need a >= 0 and b <= 0");
    }
  }
  if ((*this)(1.0) != 0.0) throw Error(ErrorCode::kInvalidArgument, "penalty at f=1 must be 0");

  // Envelope over the shortfall g = 1 - f, including the zero floor.
  std::vector<PenaltySegment> lines = segments_;
  lines.push_back({0.0, 0.0});
  std::vector<double> breaks{0.0, 1.0};
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const double da = lines[i].slope - lines[j].slope;
      if (da == 0.0) continue;
      const double g = (lines[j].intercept - lines[i].intercept) / da;
      if (g > 0.0 && g < 1.0) breaks.push_back(g);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<Piece> by_g;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double mid = 0.5 * (breaks[k] + breaks[k + 1]);
    const auto best = std::max_element(lines.begin(), lines.end(), [mid](const auto& a, const auto& b) {
      return a.slope * mid + a.intercept < b.slope * mid + b.intercept;
    });
    if (!by_g.empty() && by_g.back().slope == best->slope) {
      by_g.back().f_end = breaks[k + 1];
    } else {
      by_g.push_back({breaks[k], breaks[k + 1], best->slope});
    }
  }
  // Convert g-intervals to f-intervals, ordered by increasing f.
  for (auto it = by_g.rbegin(); it != by_g.rend(); ++it) {
    pieces_.push_back({1.0 - it->f_end, 1.0 - it->f_begin, it->slope});
  }
  pieces_.front().f_begin = 0.0;
  pieces_.back().f_end = 1.0;
}

double PenaltyFunction::operator()(double f) const {
  const double g = 1.0 - f;
  double p = 0.0;
  for (const PenaltySegment& s : segments_) p = std::max(p, s.slope * g + s.intercept);
  return p;
}

SliceCatalog::SliceCatalog(const std::array<ServiceStats, kServiceCount>& stats, double kappa)
    : kappa_(kappa) {
  for (int s = 0; s < kServiceCount; ++s) {
    const Service service = static_cast<Service>(s);
    const ServiceStats& st = stats[static_cast<std::size_t>(s)];
    const int duration = static_cast<int>(std::ceil(st.duration_slots - kFitTolerance));
    if (duration < 1) throw Error(ErrorCode::kInvalidArgument, "slice duration must be >= 1");
    const double price = service_price(service);
    const auto coeffs = penalty_coefficients(kappa, price);
    const PenaltyFunction penalty({coeffs.begin(), coeffs.end()});
    for (int k = 0; k < kDemandOptions; ++k) {
      const double demand = st.demands[static_cast<std::size_t>(k)];
      if (!(demand > 0.0)) throw Error(ErrorCode::kInvalidArgument, "slice demand must be > 0");
      if (k > 0 && demand < st.demands[static_cast<std::size_t>(k - 1)]) {
        throw Error(ErrorCode::kInvalidArgument, "demands must be non-decreasing");
      }
      const int id = s * kDemandOptions + k;
      types_[static_cast<std::size_t>(id)] = SliceType{id, service, demand, duration, price, penalty};
    }
  }
}

SliceCatalog SliceCatalog::canned(double kappa) {
  // Durations: URLLC 15, eMBB 20, BE 10 slots.
  constexpr std::array<double, kDemandOptions> demands{0.4, 8.8, 19.2, 27.2};
  return SliceCatalog({ServiceStats{15.0, demands}, ServiceStats{20.0, demands},
                       ServiceStats{10.0, demands}},
                      kappa);
}

SliceCatalog SliceCatalog::from_flows(std::span<const FlowRecord> flows, double kappa) {
  std::array<ServiceStats, kServiceCount> stats{};
  for (int s = 0; s < kServiceCount; ++s) {
    const Service service = static_cast<Service>(s);
    std::vector<double> durations;
    std::map<std::pair<std::int64_t, std::int64_t>, double> aggregated;
    for (const FlowRecord& f : flows) {
      if (f.service != service) continue;
      durations.push_back(static_cast<double>(f.duration_slots));
      aggregated[{f.start_slot, f.duration_slots}] += f.throughput_mbps;
    }
    if (durations.empty()) {
      throw Error(ErrorCode::kMissingService,
                  "no flows for service " + std::string(service_name(service)));
    }
    if (durations.size() < static_cast<std::size_t>(kMinFlowsPerService)) {
      throw Error(ErrorCode::kTooFewFlows, std::string(service_name(service)) + " has " +
                                               std::to_string(durations.size()) + " flows, need " +
                                               std::to_string(kMinFlowsPerService));
    }
    std::vector<double> throughputs;
    for (const auto& [key, tp] : aggregated) throughputs.push_back(tp);
    ServiceStats& st = stats[static_cast<std::size_t>(s)];
    st.duration_slots = percentile(durations, kDurationPercentile);
    for (int k = 0; k < kDemandOptions; ++k) {
      st.demands[static_cast<std::size_t>(k)] =
          kDemandScale * percentile(throughputs, kDemandPercentiles[static_cast<std::size_t>(k)]);
    }
  }
  return SliceCatalog(stats, kappa);
}

SliceCatalog SliceCatalog::parse(std::string_view csv_text, double kappa) {
  const auto rows = csv::parse(csv_text, kCatalogHeader);
  if (rows.size() != static_cast<std::size_t>(kSliceTypeCount)) {
    throw Error(ErrorCode::kMissingService, "catalog must list all 12 slice types");
  }
  std::array<ServiceStats, kServiceCount> stats{};
  std::array<bool, kSliceTypeCount> seen{};
  for (const csv::Row& row : rows) {
    const std::int64_t id = csv::to_int(row.fields[0], row.line);
    if (id < 0 || id >= kSliceTypeCount || seen[static_cast<std::size_t>(id)]) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(row.line) + ": bad type id");
    }
    seen[static_cast<std::size_t>(id)] = true;
    const Service service = parse_service(row.fields[1]);
    if (static_cast<int>(service) != id / kDemandOptions) {
      throw Error(ErrorCode::kMalformedRow,
                  "line " + std::to_string(row.line) + ": type id does not match service");
    }
    ServiceStats& st = stats[static_cast<std::size_t>(service)];
    st.demands[static_cast<std::size_t>(id % kDemandOptions)] = csv::to_double(row.fields[2], row.line);
    const double d = static_cast<double>(csv::to_int(row.fields[3], row.line));
    if (id % kDemandOptions != 0 && d != st.duration_slots) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(row.line) +
                                                ": all types of a service share one duration");
    }
    st.duration_slots = d;
  }
  return SliceCatalog(stats, kappa);
}

std::string SliceCatalog::to_csv() const {
  std::string out(kCatalogHeader);
  out += '\n';
  for (const SliceType& t : types_) {
    out += std::to_string(t.id) + ',' + std::string(service_name(t.service)) + ',' +
           csv::format_double(t.demand_mbps) + ',' + std::to_string(t.duration_slots) + '\n';
  }
  return out;
}

int SliceCatalog::smallest_fitting(Service service, double throughput_mbps) const {
  for (int k = 0; k < kDemandOptions; ++k) {
    const SliceType& t = types_[static_cast<std::size_t>(static_cast<int>(service) * kDemandOptions + k)];
    if (t.demand_mbps + kFitTolerance >= throughput_mbps) return k;
  }
  return -1;
}

const SliceType& SliceCatalog::largest(Service service) const {
  return types_[static_cast<std::size_t>(static_cast<int>(service) * kDemandOptions + kDemandOptions - 1)];
}

SliceRequest make_request(int index, int arrival_slot, const SliceType& type) {
  return SliceRequest{index, arrival_slot, type, type.reward()};
}

std::vector<SliceRequest> generate_slice_requests(std::span<const FlowRecord> flows,
                                                  const SliceCatalog& catalog) {
  struct Pending {
    std::int64_t start;
    std::uint64_t seq;
    std::int64_t duration;
    double throughput;
    Service service;
    bool operator>(const Pending& o) const {
      return start != o.start ? start > o.start : seq > o.seq;
    }
  };
  struct Hosted {
    double throughput;
    std::int64_t end;
  };
  struct OpenSlice {
    Service service;
    double demand;
    std::int64_t end;
    std::vector<Hosted> flows;
  };

  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
  std::uint64_t seq = 0;
  std::int64_t last_start = std::numeric_limits<std::int64_t>::min();
  for (const FlowRecord& f : flows) {
    if (f.start_slot < last_start) {
      throw Error(ErrorCode::kInvalidArgument, "flows must be sorted by start slot");
    }
    if (f.duration_slots < 1 || !(f.throughput_mbps > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "flows need duration >= 1 and throughput > 0");
    }
    last_start = f.start_slot;
    queue.push({f.start_slot, seq++, f.duration_slots, f.throughput_mbps, f.service});
  }

  std::vector<SliceRequest> out;
  std::vector<OpenSlice> open;  // creation order, parallel to `out`
  auto host = [&](std::size_t slot_idx, const Pending& flow, double throughput) {
    OpenSlice& sl = open[slot_idx];
    const std::int64_t flow_end = flow.start + flow.duration;
    sl.flows.push_back({throughput, std::min(flow_end, sl.end)});
    if (flow_end > sl.end) {
      queue.push({sl.end, seq++, flow_end - sl.end, throughput, flow.service});
    }
  };

  while (!queue.empty()) {
    const Pending flow = queue.top();
    queue.pop();
    const std::int64_t now = flow.start;
    double remaining = flow.throughput;

    // First fit among live same-service slices.
    bool placed = false;
    for (std::size_t k = 0; k < open.size(); ++k) {
      OpenSlice& sl = open[k];
      if (sl.service != flow.service || sl.end <= now) continue;
      double used = 0.0;
      for (const Hosted& h : sl.flows) {
        if (h.end > now) used += h.throughput;
      }
      if (sl.demand - used + kFitTolerance >= remaining) {
        host(k, flow, remaining);
        placed = true;
        break;
      }
    }
    if (placed) continue;

    auto open_slice = [&](const SliceType& type) {
      if (now > std::numeric_limits<int>::max()) {
        throw Error(ErrorCode::kInvalidArgument, "slot index overflow");
      }
      out.push_back(make_request(static_cast<int>(out.size()), static_cast<int>(now), type));
      open.push_back({type.service, type.demand_mbps, now + type.duration_slots, {}});
      return open.size() - 1;
    };
    const SliceType& biggest = catalog.largest(flow.service);
    if (remaining > biggest.demand_mbps + kFitTolerance) {
      // Oversized flow: fill a largest-demand slice and resubmit the rest.
      host(open_slice(biggest), flow, biggest.demand_mbps);
      queue.push({now, seq++, flow.duration, remaining - biggest.demand_mbps, flow.service});
      continue;
    }
    const int rank = catalog.smallest_fitting(flow.service, remaining);
    host(open_slice(catalog.type(static_cast<int>(flow.service) * kDemandOptions + rank)), flow,
         remaining);
  }
  return out;
}

std::vector<FlowRecord> parse_flows(std::string_view csv_text) {
  std::vector<FlowRecord> flows;
  for (const csv::Row& row : csv::parse(csv_text, kFlowHeader)) {
    FlowRecord f{csv::to_int(row.fields[0], row.line), csv::to_int(row.fields[1], row.line),
                 csv::to_double(row.fields[2], row.line), parse_service(row.fields[3])};
    if (f.duration_slots < 1 || !(f.throughput_mbps > 0.0)) {
      throw Error(ErrorCode::kMalformedRow,
                  "line " + std::to_string(row.line) + ": duration >= 1 and throughput > 0 required");
    }
    flows.push_back(f);
  }
  return flows;
}

std::string flows_to_csv(std::span<const FlowRecord> flows) {
  std::string out(kFlowHeader);
  out += '\n';
  for (const FlowRecord& f : flows) {
    out += std::to_string(f.start_slot) + ',' + std::to_string(f.duration_slots) + ',' +
           csv::format_double(f.throughput_mbps) + ',' + std::string(service_name(f.service)) + '\n';
  }
  return out;
}

std::vector<SliceRequest> parse_slice_requests(std::string_view csv_text,
                                               const SliceCatalog& catalog) {
  std::vector<SliceRequest> out;
  for (const csv::Row& row : csv::parse(csv_text, kSrHeader)) {
    const std::int64_t index = csv::to_int(row.fields[0], row.line);
    const std::int64_t arrival = csv::to_int(row.fields[1], row.line);
    const std::int64_t type_id = csv::to_int(row.fields[2], row.line);
    if (index != static_cast<std::int64_t>(out.size())) {
      throw Error(ErrorCode::kMalformedRow,
                  "line " + std::to_string(row.line) + ": indices must be 0..N-1 in order");
    }
    if (type_id < 0 || type_id >= kSliceTypeCount) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(row.line) + ": bad type id");
    }
    if (arrival < 0 || (!out.empty() && arrival < out.back().arrival_slot)) {
      throw Error(ErrorCode::kMalformedRow,
                  "line " + std::to_string(row.line) + ": arrivals must be non-decreasing");
    }
    SliceType type = catalog.type(static_cast<int>(type_id));
    if (parse_service(row.fields[3]) != type.service) {
      throw Error(ErrorCode::kMalformedRow,
                  "line " + std::to_string(row.line) + ": service does not match type id");
    }
    type.demand_mbps = csv::to_double(row.fields[4], row.line);
    type.duration_slots = static_cast<int>(csv::to_int(row.fields[5], row.line));
    if (!(type.demand_mbps > 0.0) || type.duration_slots < 1) {
      throw Error(ErrorCode::kMalformedRow,
                  "line " + std::to_string(row.line) + ": demand > 0 and duration >= 1 required");
    }
    const double reward = csv::to_double(row.fields[6], row.line);
    if (std::abs(reward - type.reward()) > 1e-9 * std::max(1.0, std::abs(reward))) {
      throw Error(ErrorCode::kMalformedRow,
                  "line " + std::to_string(row.line) + ": reward differs from price*demand*duration");
    }
    out.push_back(SliceRequest{static_cast<int>(index), static_cast<int>(arrival), type, reward});
  }
  return out;
}

std::string slice_requests_to_csv(std::span<const SliceRequest> requests) {
  std::string out(kSrHeader);
  out += '\n';
  for (const SliceRequest& r : requests) {
    out += std::to_string(r.index) + ',' + std::to_string(r.arrival_slot) + ',' +
           std::to_string(r.type.id) + ',' + std::string(service_name(r.type.service)) + ',' +
           csv::format_double(r.demand()) + ',' + std::to_string(r.duration()) + ',' +
           csv::format_double(r.reward) + '\n';
  }
  return out;
}

std::vector<FlowRecord> generate_synthetic_flows(const SyntheticFlowParams& params,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<FlowRecord> flows;
  for (int t = 0; t < params.slots; ++t) {
    for (int s = 0; s < kServiceCount; ++s) {
      const std::size_t si = static_cast<std::size_t>(s);
      std::poisson_distribution<int> count(params.arrival_rate[si]);
      const int n = params.arrival_rate[si] > 0.0 ? count(rng) : 0;
      std::geometric_distribution<int> dur(1.0 / std::max(1.0, params.mean_duration[si]));
      std::exponential_distribution<double> tp(1.0 / params.mean_throughput[si]);
      for (int k = 0; k < n; ++k) {
        flows.push_back({t, 1 + dur(rng), std::max(0.01, tp(rng)), static_cast<Service>(s)});
      }
    }
  }
  return flows;
}

}  // namespace slicead
