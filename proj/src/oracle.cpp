#include "slicead/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "slicead/csv.hpp"
#include "slicead/error.hpp"
#include "slicead/rate_control.hpp"

namespace slicead {

namespace {

struct Walk {
  double penalty = 0.0;
  bool feasible = true;
  std::vector<SlotFraction> fractions;
};

Walk walk(const std::vector<std::uint8_t>& z, const Scenario& sc, bool record) {
  Walk w;
  const auto& reqs = sc.requests;
  std::vector<std::size_t> active;
  std::vector<RateSlice> slices;
  std::size_t next = 0;
  for (int t = 0; t < sc.horizon(); ++t) {
    const double cap = sc.capacity[static_cast<std::size_t>(t)].capacity_mbps;
    std::erase_if(active, [&](std::size_t i) { return reqs[i].end_slot() <= t; });
    std::vector<std::size_t> fresh;
    while (next < reqs.size() && reqs[next].arrival_slot == t) {
      if (z[next]) fresh.push_back(next);
      ++next;
    }
    const bool arrivals = !fresh.empty();
    if (arrivals && !active.empty()) {
      slices.clear();
      for (std::size_t i : active) slices.push_back({reqs[i].index, reqs[i].demand(), &reqs[i].type.penalty});
      if (allocate(slices, cap).total_penalty >= sc.delta) {
        w.feasible = false;
        if (!record) return w;
      }
    }
    active.insert(active.end(), fresh.begin(), fresh.end());
    if (active.empty()) continue;
    slices.clear();
    for (std::size_t i : active) slices.push_back({reqs[i].index, reqs[i].demand(), &reqs[i].type.penalty});
    const Allocation a = allocate(slices, cap);
    w.penalty += a.total_penalty;
    if (record) {
      for (std::size_t k = 0; k < active.size(); ++k) {
        w.fractions.push_back({t, static_cast<int>(active[k]), a.fractions[k], a.penalties[k]});
      }
    }
  }
  return w;
}

double objective_of(const std::vector<std::uint8_t>& z, const Scenario& sc, double penalty) {
  double reward = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i]) reward += sc.requests[i].reward;
  }
  return penalty - reward;
}

class BranchAndBound {
 public:
  explicit BranchAndBound(const Scenario& sc) : sc_(sc), n_(sc.requests.size()) {
    suffix_reward_.assign(n_ + 1, 0.0);
    for (std::size_t i = n_; i-- > 0;) suffix_reward_[i] = suffix_reward_[i + 1] + sc.requests[i].reward;
    z_.assign(n_, 0);
  }

  OracleSolution solve() {
    best_z_.assign(n_, 0);
    best_ = 0.0;
    have_best_ = false;
    descend(0);
    OracleSolution s;
    s.z = best_z_;
    s.objective = best_;
    s.evaluated = evaluated_;
    return s;
  }

 private:
  void descend(std::size_t depth) {
    ++evaluated_;
    const Walk w = walk(z_, sc_, false);
    if (!w.feasible) return;
    const double partial = objective_of(z_, sc_, w.penalty);
    if (depth == n_) {
      if (!have_best_ || partial < best_) {
        best_ = partial;
        best_z_ = z_;
        have_best_ = true;
      }
      return;
    }
    if (have_best_) {
      const double bound = partial - suffix_reward_[depth];
      if (bound > best_ + 1e-9 * std::max(1.0, std::abs(best_))) return;
    }
    z_[depth] = 0;
    descend(depth + 1);
    z_[depth] = 1;
    descend(depth + 1);
    z_[depth] = 0;
  }

  const Scenario& sc_;
  std::size_t n_;
  std::vector<double> suffix_reward_;
  std::vector<std::uint8_t> z_;
  std::vector<std::uint8_t> best_z_;
  double best_ = 0.0;
  bool have_best_ = false;
  std::uint64_t evaluated_ = 0;
};

}  // namespace

AdmissionEvaluation evaluate_admission_vector(const std::vector<std::uint8_t>& z,
                                              const Scenario& scenario) {
  if (z.size() != scenario.requests.size()) {
    throw Error(ErrorCode::kInvalidArgument, "admission vector length differs from request count");
  }
  const Walk w = walk(z, scenario, false);
  AdmissionEvaluation e;
  e.feasible = w.feasible;
  e.objective = objective_of(z, scenario, w.penalty);
  return e;
}

OracleSolution solve_oracle(const Scenario& scenario, OracleMode mode) {
  const std::size_t n = scenario.requests.size();
  OracleSolution s;
  if (mode == OracleMode::kExhaustive) {
    if (n > static_cast<std::size_t>(kExhaustiveLimit)) {
      throw Error(ErrorCode::kInstanceTooLarge,
                  std::to_string(n) + " requests exceed the exhaustive limit of " +
                      std::to_string(kExhaustiveLimit));
    }
    std::vector<std::uint8_t> z(n, 0);
    bool have = false;
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      for (std::size_t i = 0; i < n; ++i) z[i] = (mask >> (n - 1 - i)) & 1U;
      ++s.evaluated;
      const AdmissionEvaluation e = evaluate_admission_vector(z, scenario);
      if (!e.feasible) continue;
      if (!have || e.objective < s.objective) {
        s.objective = e.objective;
        s.z = z;
        have = true;
      }
    }
  } else {
    s = BranchAndBound(scenario).solve();
  }
  s.fractions = walk(s.z, scenario, true).fractions;
  return s;
}

OracleMode parse_oracle_mode(std::string_view name) {
  if (name == "exhaustive") return OracleMode::kExhaustive;
  if (name == "branch_and_bound" || name == "bnb") return OracleMode::kBranchAndBound;
  throw Error(ErrorCode::kInvalidArgument, "unknown oracle mode '" + std::string(name) + "'");
}

std::string admission_vector_to_csv(const std::vector<std::uint8_t>& z) {
  std::string out = "sr_index,z\n";
  for (std::size_t i = 0; i < z.size(); ++i) {
    out += std::to_string(i) + ',' + (z[i] ? '1' : '0') + '\n';
  }
  return out;
}

std::string slot_fractions_to_csv(const std::vector<SlotFraction>& fractions) {
  std::string out = "t,sr_index,f,penalty\n";
  for (const SlotFraction& f : fractions) {
    out += std::to_string(f.t) + ',' + std::to_string(f.sr_index) + ',' +
           csv::format_double(f.fraction) + ',' + csv::format_double(f.penalty) + '\n';
  }
  return out;
}

}  // namespace slicead
