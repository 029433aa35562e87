#include "slicead/rate_control.hpp"

#include <algorithm>

#include "slicead/error.hpp"

namespace slicead {

Allocation allocate(std::span<const RateSlice> active, double capacity_mbps) {
  if (!(capacity_mbps >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "capacity must be >= 0");
  const std::size_t n = active.size();
  Allocation a;
  a.fractions.assign(n, 0.0);
  a.penalties.assign(n, 0.0);

  double total_demand = 0.0;
  for (const RateSlice& s : active) {
    if (!(s.demand_mbps > 0.0) || s.penalty == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "active slices need demand > 0 and a penalty");
    }
    total_demand += s.demand_mbps;
  }
  if (total_demand <= capacity_mbps) {
    std::fill(a.fractions.begin(), a.fractions.end(), 1.0);
    return a;
  }

  struct Candidate {
    double marginal;
    int id;
    std::size_t slice;
    std::size_t piece;
  };
  std::vector<Candidate> order;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pieces = active[i].penalty->pieces();
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      order.push_back({pieces[k].slope / active[i].demand_mbps, active[i].id, i, k});
    }
  }
  std::sort(order.begin(), order.end(), [](const Candidate& x, const Candidate& y) {
    if (x.marginal != y.marginal) return x.marginal > y.marginal;
    if (x.id != y.id) return x.id < y.id;
    return x.piece < y.piece;
  });

  double remaining = capacity_mbps;
  for (const Candidate& c : order) {
    if (remaining <= 0.0) break;
    const RateSlice& s = active[c.slice];
    const auto& piece = s.penalty->pieces()[c.piece];
    const double need = (piece.f_end - piece.f_begin) * s.demand_mbps;
    if (need <= remaining) {
      a.fractions[c.slice] = piece.f_end;
      remaining -= need;
    } else {
      a.fractions[c.slice] = piece.f_begin + remaining / s.demand_mbps;
      remaining = 0.0;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    a.penalties[i] = (*active[i].penalty)(a.fractions[i]);
    a.total_penalty += a.penalties[i];
  }
  return a;
}

double PenaltyMemo::penalty_for_level(std::span<const RateSlice> active, int level,
                                      double capacity_mbps) {
  std::vector<int> ids;
  ids.reserve(active.size());
  for (const RateSlice& s : active) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  auto key = std::make_pair(std::move(ids), level);
  if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  ++evaluations_;
  const double p = allocate(active, capacity_mbps).total_penalty;
  cache_.emplace(std::move(key), p);
  return p;
}

}  // namespace slicead
