#include "slicead/policies.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "slicead/csv.hpp"
#include "slicead/error.hpp"

namespace slicead {

namespace {

std::vector<RateSlice> slices_with(std::span<const SliceRequest> active,
                                   std::span<const SliceRequest> candidate) {
  std::vector<RateSlice> out = rate_slices(active);
  for (const SliceRequest& r : candidate) out.push_back({r.index, r.demand(), &r.type.penalty});
  return out;
}

double total_demand(std::span<const SliceRequest> requests) {
  double d = 0.0;
  for (const SliceRequest& r : requests) d += r.demand();
  return d;
}

std::vector<std::size_t> by_reward_desc(std::span<const SliceRequest> arrivals) {
  std::vector<std::size_t> order(arrivals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return arrivals[a].reward > arrivals[b].reward;
  });
  return order;
}

Admitted sorted_indices(std::span<const SliceRequest> arrivals, const std::vector<std::size_t>& picks) {
  Admitted out;
  for (std::size_t k : picks) out.push_back(arrivals[k].index);
  std::sort(out.begin(), out.end());
  return out;
}

QStepResult q_step(QTable& table, const PolicyContext& ctx, double lambda, double epsilon, bool learn,
                   bool predictive) {
  QStepResult res;
  const int horizon = ctx.horizon;
  std::vector<double> predicted;
  if (predictive) {
    predicted = predicted_capacities(ctx);
  } else {
    predicted.assign(static_cast<std::size_t>(horizon), ctx.table->capacity(ctx.table->top()));
  }

  QState counts;
  for (const SliceRequest& r : ctx.active) {
    auto& c = counts.counts[static_cast<std::size_t>(r.type.id)];
    c = static_cast<std::uint8_t>(std::min(kCountCap, c + 1));
  }
  double committed = total_demand(ctx.active);

  const std::vector<std::size_t> order = by_reward_desc(ctx.arrivals);
  std::vector<std::size_t> picks;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t j = 0; j < order.size(); ++j) {
    const SliceRequest& sr = ctx.arrivals[order[j]];
    QState s = counts;
    s.arrival_type = sr.type.id;
    s.cf = count_satisfied(predicted, committed + sr.demand());

    int action;
    if (epsilon > 0.0 && unit(*ctx.rng) < epsilon) {
      action = static_cast<int>((*ctx.rng)() >> 63);
    } else {
      action = table.get(s, 1).q > table.get(s, 0).q ? 1 : 0;
    }

    double r = 0.0;
    if (action == 1) {
      r = sr.reward - sr.reward * (1.0 - static_cast<double>(s.cf) / horizon) * lambda;
      auto& c = counts.counts[static_cast<std::size_t>(sr.type.id)];
      c = static_cast<std::uint8_t>(std::min(kCountCap, c + 1));
      committed += sr.demand();
      picks.push_back(order[j]);
    }

    QState next = counts;
    if (j + 1 < order.size()) {
      const SliceRequest& nx = ctx.arrivals[order[j + 1]];
      next.arrival_type = nx.type.id;
      next.cf = count_satisfied(predicted, committed + nx.demand());
    } else {
      next.arrival_type = kNoArrivalType;
      next.cf = 0;
    }

    if (learn) {
      const double target = r + table.max_q(next);
      QEntry& e = table.at(s, action);
      ++e.o;
      const double alpha = 0.5 / static_cast<double>(e.o);
      const double before = e.q;
      e.q = e.q + alpha * (target - e.q);
      res.deltas.push_back(std::abs(e.q - before));
    }
  }
  res.admitted = sorted_indices(ctx.arrivals, picks);
  return res;
}

}  // namespace

double expected_short_term_revenue(std::span<const SliceRequest> candidate, const PolicyContext& ctx,
                                   PenaltyMemo& memo) {
  double reward = 0.0;
  for (const SliceRequest& r : candidate) reward += r.reward;
  const std::vector<RateSlice> set = slices_with(ctx.active, candidate);
  if (set.empty()) return reward;

  double penalty;
  if (ctx.table != nullptr && ctx.table->capacity(ctx.level) == ctx.capacity_mbps) {
    penalty = memo.penalty_for_level(set, ctx.level, ctx.capacity_mbps);
  } else {
    penalty = allocate(set, ctx.capacity_mbps).total_penalty;
  }
  if (ctx.pmf != nullptr) {
    for (int h = 1; h <= ctx.pmf->horizon(); ++h) {
      const std::vector<double>& p = ctx.pmf->step(h);
      for (int l = 0; l < static_cast<int>(p.size()); ++l) {
        if (p[static_cast<std::size_t>(l)] == 0.0) continue;
        penalty += p[static_cast<std::size_t>(l)] * memo.penalty_for_level(set, l, ctx.table->capacity(l));
      }
    }
  }
  return reward - penalty;
}

double expected_short_term_revenue(std::span<const SliceRequest> candidate, const PolicyContext& ctx) {
  PenaltyMemo memo;
  return expected_short_term_revenue(candidate, ctx, memo);
}

Admitted decide_locally_optimal(const PolicyContext& ctx, int exhaustive_threshold) {
  const std::size_t n = ctx.arrivals.size();
  if (n == 0) return {};
  PenaltyMemo memo;
  std::vector<SliceRequest> cand;
  std::vector<std::size_t> best;
  if (n <= static_cast<std::size_t>(exhaustive_threshold)) {
    double best_value = 0.0;
    bool have = false;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      cand.clear();
      std::vector<std::size_t> picks;
      for (std::size_t i = 0; i < n; ++i) {
        if ((mask >> i) & 1U) {
          cand.push_back(ctx.arrivals[i]);
          picks.push_back(i);
        }
      }
      const double v = expected_short_term_revenue(cand, ctx, memo);
      if (!have || v > best_value) {
        best_value = v;
        best = std::move(picks);
        have = true;
      }
    }
  } else {
    double value = expected_short_term_revenue(cand, ctx, memo);
    for (std::size_t k : by_reward_desc(ctx.arrivals)) {
      cand.push_back(ctx.arrivals[k]);
      const double v = expected_short_term_revenue(cand, ctx, memo);
      if (v > value) {
        value = v;
        best.push_back(k);
      } else {
        cand.pop_back();
      }
    }
  }
  return sorted_indices(ctx.arrivals, best);
}

Admitted decide_naive_greedy(const PolicyContext& ctx) {
  double committed = total_demand(ctx.active);
  Admitted out;
  for (const SliceRequest& r : ctx.arrivals) {
    if (committed + r.demand() <= ctx.capacity_mbps) {
      committed += r.demand();
      out.push_back(r.index);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Admitted decide_random(const PolicyContext& ctx) {
  Admitted out;
  for (const SliceRequest& r : ctx.arrivals) {
    if (((*ctx.rng)() >> 63) != 0) out.push_back(r.index);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Admitted decide_admit_all(const PolicyContext& ctx) {
  Admitted out;
  for (const SliceRequest& r : ctx.arrivals) out.push_back(r.index);
  std::sort(out.begin(), out.end());
  return out;
}

int count_satisfied(std::span<const double> predicted_mbps, double demand_mbps) {
  int n = 0;
  for (double c : predicted_mbps) {
    if (demand_mbps <= c) ++n;
  }
  return n;
}

std::vector<double> predicted_capacities(const PolicyContext& ctx) {
  std::vector<double> out;
  if (ctx.pmf == nullptr) {
    out.assign(static_cast<std::size_t>(ctx.horizon), ctx.capacity_mbps);
    return out;
  }
  for (int h = 1; h <= ctx.pmf->horizon(); ++h) out.push_back(ctx.table->capacity(ctx.pmf->argmax_level(h)));
  return out;
}

int compute_cf(const PolicyContext& ctx, double committed_mbps, const SliceRequest& candidate) {
  return count_satisfied(predicted_capacities(ctx), committed_mbps + candidate.demand());
}

std::string QState::key() const {
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(counts[i]);
  }
  out += '|' + std::to_string(arrival_type) + '|' + std::to_string(cf);
  return out;
}

QState QState::from_key(std::string_view key) {
  auto bad = [&] { return Error(ErrorCode::kMalformedRow, "bad state key '" + std::string(key) + "'"); };
  std::vector<int> nums;
  std::vector<char> seps;
  const char* p = key.data();
  const char* end = key.data() + key.size();
  while (p < end) {
    int v = 0;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || v < 0) throw bad();
    nums.push_back(v);
    p = next;
    if (p < end) {
      seps.push_back(*p);
      ++p;
      if (p == end) throw bad();
    }
  }
  if (nums.size() != kSliceTypeCount + 2) throw bad();
  for (std::size_t i = 0; i < seps.size(); ++i) {
    const char want = i + 1 < kSliceTypeCount ? ',' : '|';
    if (seps[i] != want) throw bad();
  }
  QState s;
  for (std::size_t i = 0; i < kSliceTypeCount; ++i) {
    if (nums[i] > kCountCap) throw bad();
    s.counts[i] = static_cast<std::uint8_t>(nums[i]);
  }
  s.arrival_type = nums[kSliceTypeCount];
  s.cf = nums[kSliceTypeCount + 1];
  if (s.arrival_type > kNoArrivalType) throw bad();
  return s;
}

QEntry QTable::get(const QState& s, int action) const {
  const auto it = entries_.find({s, action});
  return it == entries_.end() ? QEntry{} : it->second;
}

double QTable::max_q(const QState& s) const { return std::max(get(s, 0).q, get(s, 1).q); }

std::string QTable::serialize() const {
  std::string out;
  for (const auto& [k, e] : entries_) {
    out += k.first.key() + '\t' + std::to_string(k.second) + '\t' + csv::format_double(e.q) + '\t' +
           std::to_string(e.o) + '\n';
  }
  return out;
}

QTable QTable::parse(std::string_view text) {
  QTable t;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::size_t pos = 0;
    while (true) {
      const std::size_t tab = line.find('\t', pos);
      f.push_back(line.substr(pos, tab - pos));
      if (tab == std::string_view::npos) break;
      pos = tab + 1;
    }
    if (f.size() != 4) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": expected 4 fields");
    }
    const QState s = QState::from_key(f[0]);
    const std::int64_t action = csv::to_int(f[1], line_no);
    if (action != 0 && action != 1) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": action must be 0 or 1");
    }
    QEntry e{csv::to_double(f[2], line_no), csv::to_int(f[3], line_no)};
    if (e.o < 0) throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(line_no) + ": negative count");
    if (!t.entries_.emplace(std::make_pair(s, static_cast<int>(action)), e).second) {
      throw Error(ErrorCode::kDuplicateRow, "line " + std::to_string(line_no) + ": duplicate entry");
    }
  }
  return t;
}

QStepResult pql_step(QTable& table, const PolicyContext& ctx, double lambda, double epsilon, bool learn) {
  return q_step(table, ctx, lambda, epsilon, learn, true);
}

QStepResult naive_ql_step(QTable& table, const PolicyContext& ctx, double lambda, double epsilon,
                          bool learn) {
  return q_step(table, ctx, lambda, epsilon, learn, false);
}

QLearner::QLearner(bool predictive, QLearningParams params)
    : predictive_(predictive), params_(params), epsilon_(params.epsilon0) {}

Admitted QLearner::step(const PolicyContext& ctx) {
  if (frozen_) {
    return (predictive_ ? pql_step : naive_ql_step)(table_, ctx, params_.lambda, 0.0, false).admitted;
  }
  QStepResult r = (predictive_ ? pql_step : naive_ql_step)(table_, ctx, params_.lambda, epsilon_, true);
  for (double d : r.deltas) {
    window_.push_back(d);
    window_sum_ += d;
    if (window_.size() > params_.window) {
      window_sum_ -= window_.front();
      window_.pop_front();
    }
  }
  updates_ += static_cast<std::int64_t>(r.deltas.size());
  epsilon_ = std::max(epsilon_ * params_.epsilon_decay, params_.epsilon_min);
  return std::move(r.admitted);
}

double QLearner::window_mean() const {
  return window_.empty() ? 0.0 : window_sum_ / static_cast<double>(window_.size());
}

bool QLearner::converged() const {
  return window_.size() >= params_.window && window_mean() < params_.tolerance;
}

Admitted FixedVectorPolicy::decide(const PolicyContext& ctx) {
  Admitted out;
  for (const SliceRequest& r : ctx.arrivals) {
    if (static_cast<std::size_t>(r.index) < z_.size() && z_[static_cast<std::size_t>(r.index)]) {
      out.push_back(r.index);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{"random", "naive_greedy", "lo", "naive_ql", "pql", "admit_all"};
  return names;
}

bool is_policy_name(std::string_view name) {
  const auto& n = policy_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

}  // namespace slicead
