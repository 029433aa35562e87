#pragma once

// Per-slot rate control: split the link capacity over active slices so that
// the total convex piecewise-linear underprovisioning penalty is minimal.

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "slicead/slicing.hpp"

namespace slicead {

// Non-owning view of one active slice; `penalty` must outlive the call.
struct RateSlice {
  int id = 0;  // SR index, used for deterministic tie-breaking
  double demand_mbps = 0.0;
  const PenaltyFunction* penalty = nullptr;
};

struct Allocation {
  std::vector<double> fractions;  // parallel to the input slices
  std::vector<double> penalties;
  double total_penalty = 0.0;
};

// Exact optimum. Envelope pieces are funded greedily in decreasing order of
// penalty removed per Mbps; equal marginals go to the lower SR id first.
// If the demands fit, every fraction is 1 and the penalty is 0.
Allocation allocate(std::span<const RateSlice> active, double capacity_mbps);

inline std::vector<RateSlice> rate_slices(std::span<const SliceRequest> requests) {
  std::vector<RateSlice> out;
  out.reserve(requests.size());
  for (const SliceRequest& r : requests) out.push_back({r.index, r.demand(), &r.type.penalty});
  return out;
}

// Memoizes allocate(...).total_penalty per (set of SR ids, capacity level)
// for the lifetime of one admission decision.
class PenaltyMemo {
 public:
  double penalty_for_level(std::span<const RateSlice> active, int level, double capacity_mbps);
  std::size_t evaluations() const { return evaluations_; }

 private:
  std::map<std::pair<std::vector<int>, int>, double> cache_;
  std::size_t evaluations_ = 0;
};

}  // namespace slicead
