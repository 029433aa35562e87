#pragma once

// The slice-request economy: service classes, convex piecewise-linear
// underprovisioning penalties, the 12-type catalog, and the flow-to-request
// packing pipeline.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slicead {

enum class Service { kURLLC = 0, kEMBB = 1, kBE = 2 };

inline constexpr int kServiceCount = 3;
inline constexpr int kDemandOptions = 4;
inline constexpr int kSliceTypeCount = kServiceCount * kDemandOptions;
inline constexpr double kDefaultKappa = 0.2;

std::string_view service_name(Service s);
// Throws kUnknownService.
Service parse_service(std::string_view name);
// Price per Mbps per slot: 10, 5 and 2.5 for URLLC, eMBB and BE.
double service_price(Service s);

struct PenaltySegment {
  double slope = 0.0;      // a >= 0
  double intercept = 0.0;  // b <= 0

  friend bool operator==(const PenaltySegment&, const PenaltySegment&) = default;
};

// (3*kappa*rho, -kappa*rho) and (kappa*rho, 0).
std::array<PenaltySegment, 2> penalty_coefficients(double kappa, double price);

// P(f) = max(0, max_k a_k (1 - f) + b_k) on f in [0, 1].
class PenaltyFunction {
 public:
  // A linear stretch of the envelope over [f_begin, f_end]; `slope` is the
  // penalty removed per unit of f.
  struct Piece {
    double f_begin = 0.0;
    double f_end = 1.0;
    double slope = 0.0;
  };

  PenaltyFunction() = default;
  // Throws kInvalidArgument unless P(1) == 0 and every slope is >= 0.
  explicit PenaltyFunction(std::vector<PenaltySegment> segments);

  double operator()(double f) const;
  const std::vector<PenaltySegment>& segments() const { return segments_; }
  // Ordered by increasing f; slopes are non-increasing.
  const std::vector<Piece>& pieces() const { return pieces_; }

 private:
  std::vector<PenaltySegment> segments_;
  std::vector<Piece> pieces_;
};

struct SliceType {
  int id = 0;  // service * 4 + demand rank
  Service service = Service::kBE;
  double demand_mbps = 0.0;
  int duration_slots = 1;
  double price = 0.0;
  PenaltyFunction penalty;

  double reward() const { return price * demand_mbps * duration_slots; }
};

struct FlowRecord {
  std::int64_t start_slot = 0;
  std::int64_t duration_slots = 1;
  double throughput_mbps = 0.0;
  Service service = Service::kBE;
};

struct ServiceStats {
  double duration_slots = 1.0;               // 90th percentile of flow duration
  std::array<double, kDemandOptions> demands{};  // ascending, already scaled
};

class SliceCatalog {
 public:
  SliceCatalog() = default;
  // Exactly kServiceCount entries, indexed by service.
  SliceCatalog(const std::array<ServiceStats, kServiceCount>& stats, double kappa);

  // Demands 0.4, 8.8, 19.2, 27.2 Mbps for every service.
  static SliceCatalog canned(double kappa = kDefaultKappa);
  // Percentiles of flow statistics; throws kMissingService / kTooFewFlows.
  static SliceCatalog from_flows(std::span<const FlowRecord> flows, double kappa = kDefaultKappa);
  // CSV `type_id,service,demand_mbps,duration_slots` with all 12 entries.
  static SliceCatalog parse(std::string_view csv_text, double kappa = kDefaultKappa);
  std::string to_csv() const;

  const SliceType& type(int id) const { return types_.at(static_cast<std::size_t>(id)); }
  const std::array<SliceType, kSliceTypeCount>& types() const { return types_; }
  double kappa() const { return kappa_; }
  // Smallest demand rank of `service` whose demand covers `throughput`, or -1.
  int smallest_fitting(Service service, double throughput_mbps) const;
  const SliceType& largest(Service service) const;

 private:
  std::array<SliceType, kSliceTypeCount> types_{};
  double kappa_ = kDefaultKappa;
};

struct SliceRequest {
  int index = 0;
  int arrival_slot = 0;
  SliceType type;
  double reward = 0.0;

  double demand() const { return type.demand_mbps; }
  int duration() const { return type.duration_slots; }
  // Active during [arrival_slot, end_slot()).
  int end_slot() const { return arrival_slot + type.duration_slots; }
};

SliceRequest make_request(int index, int arrival_slot, const SliceType& type);

// First-fit packing of flows into same-service requests. Flows must be
// sorted by start slot. Throws kUnknownService / kInvalidArgument.
std::vector<SliceRequest> generate_slice_requests(std::span<const FlowRecord> flows,
                                                  const SliceCatalog& catalog);

// Flow CSV `start_slot,duration_slots,throughput_mbps,service`.
std::vector<FlowRecord> parse_flows(std::string_view csv_text);
std::string flows_to_csv(std::span<const FlowRecord> flows);

// SR CSV `index,arrival_slot,type_id,service,demand_mbps,duration_slots,reward`.
// Penalty shapes come from the catalog entry of each type id.
std::vector<SliceRequest> parse_slice_requests(std::string_view csv_text,
                                               const SliceCatalog& catalog);
std::string slice_requests_to_csv(std::span<const SliceRequest> requests);

struct SyntheticFlowParams {
  int slots = 60;
  // Mean new flows per slot for URLLC, eMBB, BE.
  std::array<double, kServiceCount> arrival_rate{2.0, 2.0, 2.0};
  std::array<double, kServiceCount> mean_duration{8.0, 12.0, 5.0};
  std::array<double, kServiceCount> mean_throughput{2.0, 6.0, 1.0};
};

// Poisson arrivals with geometric durations and exponential throughputs.
std::vector<FlowRecord> generate_synthetic_flows(const SyntheticFlowParams& params,
                                                 std::uint64_t seed);

}  // namespace slicead
