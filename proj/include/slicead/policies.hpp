#pragma once

// Online admission policies. Every decision function is pure given its
// context, except for draws from the context rng and Q-table updates.

#include <array>
#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicead/forecast.hpp"
#include "slicead/link_capacity.hpp"
#include "slicead/rate_control.hpp"
#include "slicead/slicing.hpp"

namespace slicead {

using Rng = std::mt19937_64;

struct PolicyContext {
  int slot = 0;
  std::span<const SliceRequest> active;    // beginning-of-slot active set
  std::span<const SliceRequest> arrivals;  // all with arrival_slot == slot
  double capacity_mbps = 0.0;
  int level = 0;
  const AcmTable* table = nullptr;
  const CapacityPmf* pmf = nullptr;  // steps h = 1..H; may be null when unused
  int horizon = kDefaultHorizon;
  Rng* rng = nullptr;
};

// Admission decisions are returned as SR indices in ascending order.
using Admitted = std::vector<int>;

double expected_short_term_revenue(std::span<const SliceRequest> candidate, const PolicyContext& ctx,
                                   PenaltyMemo& memo);
double expected_short_term_revenue(std::span<const SliceRequest> candidate, const PolicyContext& ctx);

inline constexpr int kDefaultLoThreshold = 8;

Admitted decide_locally_optimal(const PolicyContext& ctx, int exhaustive_threshold = kDefaultLoThreshold);
Admitted decide_naive_greedy(const PolicyContext& ctx);
Admitted decide_random(const PolicyContext& ctx);
Admitted decide_admit_all(const PolicyContext& ctx);

// Number of entries in `predicted_mbps` that cover `demand_mbps`.
int count_satisfied(std::span<const double> predicted_mbps, double demand_mbps);
// Predicted capacity per step: the capacity of the most probable level.
std::vector<double> predicted_capacities(const PolicyContext& ctx);
// `committed_mbps` holds the active demand plus same-slot admissions so far.
int compute_cf(const PolicyContext& ctx, double committed_mbps, const SliceRequest& candidate);

inline constexpr int kCountCap = 15;
inline constexpr int kNoArrivalType = kSliceTypeCount;

struct QState {
  std::array<std::uint8_t, kSliceTypeCount> counts{};
  int arrival_type = kNoArrivalType;
  int cf = 0;

  auto operator<=>(const QState&) const = default;
  std::string key() const;
  static QState from_key(std::string_view key);
};

struct QEntry {
  double q = 0.0;
  std::int64_t o = 0;
};

class QTable {
 public:
  QEntry get(const QState& s, int action) const;
  QEntry& at(const QState& s, int action) { return entries_[{s, action}]; }
  double max_q(const QState& s) const;
  std::size_t size() const { return entries_.size(); }

  // One line per entry: `state_key TAB action TAB q TAB o`.
  std::string serialize() const;
  static QTable parse(std::string_view text);

  friend bool operator==(const QTable& a, const QTable& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    auto it = b.entries_.begin();
    for (const auto& [k, e] : a.entries_) {
      if (k != it->first || e.q != it->second.q || e.o != it->second.o) return false;
      ++it;
    }
    return true;
  }

 private:
  std::map<std::pair<QState, int>, QEntry> entries_;
};

struct QStepResult {
  Admitted admitted;
  std::vector<double> deltas;  // |Q change| of every update in this batch
};

inline constexpr double kDefaultLambda = 0.5;

// Predictive Q-learning over one arrival batch. With `learn` false the
// table is read only and exploitation uses the frozen values.
QStepResult pql_step(QTable& table, const PolicyContext& ctx, double lambda, double epsilon,
                     bool learn = true);
// Same as pql_step with the capacity assumed fixed at the top level.
QStepResult naive_ql_step(QTable& table, const PolicyContext& ctx, double lambda, double epsilon,
                          bool learn = true);

struct QLearningParams {
  double lambda = kDefaultLambda;
  double epsilon0 = 1.0;
  double epsilon_decay = 0.999;
  double epsilon_min = 0.01;
  std::size_t window = 10000;
  double tolerance = 1e-3;
  std::int64_t max_updates = 100000;
};

class QLearner {
 public:
  QLearner(bool predictive, QLearningParams params = {});

  Admitted step(const PolicyContext& ctx);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  bool predictive() const { return predictive_; }
  // Mean |delta| over the last `window` updates, once the window is full.
  bool converged() const;
  bool exhausted() const { return updates_ >= params_.max_updates; }
  double window_mean() const;
  std::int64_t updates() const { return updates_; }
  double epsilon() const { return epsilon_; }
  const QLearningParams& params() const { return params_; }
  QTable& table() { return table_; }
  const QTable& table() const { return table_; }

 private:
  bool predictive_;
  QLearningParams params_;
  QTable table_;
  double epsilon_;
  bool frozen_ = false;
  std::deque<double> window_;
  double window_sum_ = 0.0;
  std::int64_t updates_ = 0;
};

class AdmissionPolicy {
 public:
  virtual ~AdmissionPolicy() = default;
  virtual std::string name() const = 0;
  virtual bool needs_forecast() const { return false; }
  virtual bool bypasses_gate() const { return false; }
  virtual Admitted decide(const PolicyContext& ctx) = 0;
};

class RandomPolicy : public AdmissionPolicy {
 public:
  std::string name() const override { return "random"; }
  Admitted decide(const PolicyContext& ctx) override { return decide_random(ctx); }
};

class NaiveGreedyPolicy : public AdmissionPolicy {
 public:
  std::string name() const override { return "naive_greedy"; }
  Admitted decide(const PolicyContext& ctx) override { return decide_naive_greedy(ctx); }
};

class LocallyOptimalPolicy : public AdmissionPolicy {
 public:
  explicit LocallyOptimalPolicy(int threshold = kDefaultLoThreshold) : threshold_(threshold) {}
  std::string name() const override { return "lo"; }
  bool needs_forecast() const override { return true; }
  Admitted decide(const PolicyContext& ctx) override { return decide_locally_optimal(ctx, threshold_); }

 private:
  int threshold_;
};

class AdmitAllPolicy : public AdmissionPolicy {
 public:
  std::string name() const override { return "admit_all"; }
  bool bypasses_gate() const override { return true; }
  Admitted decide(const PolicyContext& ctx) override { return decide_admit_all(ctx); }
};

class QLearningPolicy : public AdmissionPolicy {
 public:
  explicit QLearningPolicy(std::shared_ptr<QLearner> learner) : learner_(std::move(learner)) {}
  std::string name() const override { return learner_->predictive() ? "pql" : "naive_ql"; }
  bool needs_forecast() const override { return learner_->predictive(); }
  Admitted decide(const PolicyContext& ctx) override { return learner_->step(ctx); }
  QLearner& learner() { return *learner_; }

 private:
  std::shared_ptr<QLearner> learner_;
};

// Replays a fixed admission vector indexed by SR index.
class FixedVectorPolicy : public AdmissionPolicy {
 public:
  explicit FixedVectorPolicy(std::vector<std::uint8_t> z) : z_(std::move(z)) {}
  std::string name() const override { return "fixed"; }
  Admitted decide(const PolicyContext& ctx) override;

 private:
  std::vector<std::uint8_t> z_;
};

// random, naive_greedy, lo, naive_ql, pql, admit_all
const std::vector<std::string>& policy_names();
bool is_policy_name(std::string_view name);

}  // namespace slicead
