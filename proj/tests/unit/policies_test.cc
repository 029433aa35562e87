#include "slicead/policies.hpp"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "support/fixtures.hpp"

namespace slicead {
namespace {

using testing::request;

struct Ctx {
  AcmTable table;
  CapacityPmf pmf;
  std::vector<SliceRequest> active;
  std::vector<SliceRequest> arrivals;
  Rng rng{7};

  PolicyContext get(int level) {
    PolicyContext c;
    c.slot = arrivals.empty() ? 0 : arrivals.front().arrival_slot;
    c.active = active;
    c.arrivals = arrivals;
    c.level = level;
    c.capacity_mbps = table.capacity(level);
    c.table = &table;
    c.pmf = &pmf;
    c.horizon = pmf.horizon();
    c.rng = &rng;
    return c;
  }
};

Ctx point_mass_ctx(std::vector<double> caps, int level) {
  Ctx c{testing::toy_table(caps), {}, {}, {}};
  c.pmf = CapacityPmf::point_mass(level, static_cast<int>(caps.size()), 5);
  return c;
}

TEST(ExpectedRevenue, EmptyCandidateNoActive) {
  Ctx c = point_mass_ctx({0.0, 50.0}, 1);
  EXPECT_EQ(expected_short_term_revenue({}, c.get(1)), 0.0);
}

TEST(ExpectedRevenue, AbundantCapacityGivesRewardSum) {
  Ctx c = point_mass_ctx({0.0, 100.0}, 1);
  c.arrivals = {request(0, 0, Service::kURLLC, 8.8, 5), request(1, 0, Service::kBE, 19.2, 3)};
  EXPECT_EQ(expected_short_term_revenue(c.arrivals, c.get(1)), 440.0 + 144.0);
}

TEST(ExpectedRevenue, MatchesEnumerationOverCapacityPaths) {
  Ctx c{testing::toy_table({6.0, 16.0}), {}, {}, {}};
  c.pmf.probs = {{0.3, 0.7}, {0.55, 0.45}};
  c.active = {request(0, 0, Service::kEMBB, 5.0, 9)};
  c.arrivals = {request(1, 1, Service::kURLLC, 8.8, 4), request(2, 1, Service::kBE, 4.0, 4)};
  const PolicyContext ctx = c.get(1);
  const double caps[2] = {6.0, 16.0};
  for (int mask = 0; mask < 4; ++mask) {
    std::vector<SliceRequest> cand;
    for (int i = 0; i < 2; ++i)
      if (mask >> i & 1) cand.push_back(c.arrivals[static_cast<std::size_t>(i)]);
    std::vector<SliceRequest> all = c.active;
    all.insert(all.end(), cand.begin(), cand.end());
    const auto slices = rate_slices(all);
    double reward = 0.0;
    for (const auto& r : cand) reward += r.reward;
    double expected_penalty = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double prob = c.pmf.probs[0][static_cast<std::size_t>(a)] * c.pmf.probs[1][static_cast<std::size_t>(b)];
        expected_penalty += prob * (allocate(slices, caps[a]).total_penalty + allocate(slices, caps[b]).total_penalty);
      }
    const double direct = reward - allocate(slices, 16.0).total_penalty - expected_penalty;
    EXPECT_NEAR(expected_short_term_revenue(cand, ctx), direct, 1e-12) << "mask " << mask;
  }
}

TEST(ExpectedRevenue, MemoUsesOneEvaluationPerLevel) {
  Ctx c{testing::toy_table({0.0, 5.0, 10.0, 20.0}), {}, {}, {}};
  c.pmf.probs.assign(5, {0.1, 0.2, 0.3, 0.4});
  c.arrivals = {request(0, 0, Service::kEMBB, 12.0, 4)};
  PenaltyMemo memo;
  expected_short_term_revenue(c.arrivals, c.get(2), memo);
  EXPECT_EQ(memo.evaluations(), 4u);
}

TEST(LocallyOptimal, EmptyAndAbundant) {
  Ctx c = point_mass_ctx({0.0, 1000.0}, 1);
  EXPECT_TRUE(decide_locally_optimal(c.get(1)).empty());
  for (int i = 0; i < 6; ++i) c.arrivals.push_back(request(i, 0, static_cast<Service>(i % 3), 19.2, 3));
  EXPECT_EQ(decide_locally_optimal(c.get(1)), (Admitted{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(decide_locally_optimal(c.get(1), 0), (Admitted{0, 1, 2, 3, 4, 5}));
}

TEST(LocallyOptimal, ExhaustiveBeatsGreedyOnBlockingBatch) {
  Ctx c = point_mass_ctx({0.0, 20.0}, 1);
  c.arrivals = {request(0, 0, Service::kURLLC, 15.0, 1, 50.0), request(1, 0, Service::kURLLC, 10.0, 1, 50.0),
                request(2, 0, Service::kURLLC, 10.0, 1, 50.0)};
  const PolicyContext ctx = c.get(1);
  const Admitted ex = decide_locally_optimal(ctx);
  const Admitted gr = decide_locally_optimal(ctx, 0);
  EXPECT_EQ(ex, (Admitted{1, 2}));
  EXPECT_EQ(gr, (Admitted{0}));
  auto value = [&](const Admitted& a) {
    std::vector<SliceRequest> cand;
    for (int i : a) cand.push_back(c.arrivals[static_cast<std::size_t>(i)]);
    return expected_short_term_revenue(cand, ctx);
  };
  EXPECT_GT(value(ex), value(gr));
}

TEST(LocallyOptimal, ExhaustiveIsArgmaxOverSubsets) {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 40; ++trial) {
    Ctx c{testing::toy_table({0.0, 10.0, 25.0, 40.0}), {}, {}, {}};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int h = 0; h < 5; ++h) {
      std::vector<double> col(4);
      double s = 0.0;
      for (double& p : col) s += (p = u(rng));
      for (double& p : col) p /= s;
      c.pmf.probs.push_back(col);
    }
    const double kappa = std::uniform_real_distribution<double>(0.2, 40.0)(rng);
    const int n = std::uniform_int_distribution<int>(0, 8)(rng);
    for (int i = 0; i < n; ++i)
      c.arrivals.push_back(request(i, 0, static_cast<Service>(i % 3), 2.0 + 20.0 * u(rng), 1 + i % 4, kappa));
    c.active = {request(100, 0, Service::kEMBB, 10.0 * u(rng) + 1.0, 5, kappa)};
    const PolicyContext ctx = c.get(2);
    const Admitted best = decide_locally_optimal(ctx);
    std::vector<SliceRequest> chosen;
    for (int i : best) chosen.push_back(c.arrivals[static_cast<std::size_t>(i)]);
    const double best_value = expected_short_term_revenue(chosen, ctx);
    for (int mask = 0; mask < (1 << n); ++mask) {
      std::vector<SliceRequest> cand;
      for (int i = 0; i < n; ++i)
        if (mask >> i & 1) cand.push_back(c.arrivals[static_cast<std::size_t>(i)]);
      EXPECT_GE(best_value, expected_short_term_revenue(cand, ctx));
    }
  }
}

TEST(LocallyOptimal, GreedyKeepsArrivalOrderOnEqualRewards) {
  Ctx c = point_mass_ctx({0.0, 10.0}, 1);
  c.arrivals = {request(0, 0, Service::kURLLC, 10.0, 2, 50.0), request(1, 0, Service::kURLLC, 10.0, 2, 50.0)};
  EXPECT_EQ(decide_locally_optimal(c.get(1), 0), (Admitted{0}));
}

TEST(NaiveGreedy, Examples) {
  Ctx c = point_mass_ctx({0.0, 13.0, 100.0}, 1);
  c.arrivals = {request(0, 0, Service::kEMBB, 6.0, 2), request(1, 0, Service::kEMBB, 6.0, 2),
                request(2, 0, Service::kEMBB, 6.0, 2)};
  EXPECT_EQ(decide_naive_greedy(c.get(1)), (Admitted{0, 1}));
  EXPECT_TRUE(decide_naive_greedy(c.get(0)).empty());
  EXPECT_EQ(decide_naive_greedy(c.get(2)), (Admitted{0, 1, 2}));
  c.active = {request(9, 0, Service::kBE, 7.0, 3)};
  EXPECT_EQ(decide_naive_greedy(c.get(1)), (Admitted{0}));
}

TEST(RandomPolicy, FairCoin) {
  Ctx c = point_mass_ctx({0.0, 10.0}, 1);
  EXPECT_TRUE(decide_random(c.get(1)).empty());
  for (int i = 0; i < 10000; ++i) c.arrivals.push_back(request(i, 0, Service::kBE, 0.4, 1));
  const double rate = static_cast<double>(decide_random(c.get(1)).size()) / 10000.0;
  EXPECT_NEAR(rate, 0.5, 0.02);
  Ctx d = point_mass_ctx({0.0, 10.0}, 1);
  d.arrivals = c.arrivals;
  c.rng.seed(3);
  d.rng.seed(3);
  EXPECT_EQ(decide_random(c.get(1)), decide_random(d.get(1)));
}

TEST(AdmitAll, WholeBatch) {
  Ctx c = point_mass_ctx({0.0, 1.0}, 0);
  EXPECT_TRUE(decide_admit_all(c.get(0)).empty());
  c.arrivals = {request(0, 0, Service::kBE, 27.2, 2), request(1, 0, Service::kBE, 27.2, 2)};
  EXPECT_EQ(decide_admit_all(c.get(0)), (Admitted{0, 1}));
  EXPECT_TRUE(AdmitAllPolicy().bypasses_gate());
}

TEST(ContinuationFeasibility, Examples) {
  Ctx top = point_mass_ctx({0.0, 5.0, 10.0}, 2);
  EXPECT_EQ(compute_cf(top.get(2), 0.0, request(0, 0, Service::kBE, 0.4, 1)), 5);
  Ctx zero = point_mass_ctx({0.0, 5.0, 10.0}, 0);
  EXPECT_EQ(compute_cf(zero.get(0), 0.0, request(0, 0, Service::kBE, 0.4, 1)), 0);

  Ctx c{testing::toy_table({0.0, 5.0, 10.0}), {}, {}, {}};
  c.pmf.probs = {{0, 0, 1}, {0, 0.2, 0.8}, {0, 1, 0}, {0.3, 0.6, 0.1}, {0.25, 0.5, 0.25}};
  EXPECT_EQ(predicted_capacities(c.get(2)), (std::vector<double>{10, 10, 5, 5, 5}));
  EXPECT_EQ(compute_cf(c.get(2), 0.0, request(0, 0, Service::kBE, 7.0, 1)), 2);
  EXPECT_EQ(compute_cf(c.get(2), 3.0, request(0, 0, Service::kBE, 4.0, 1)), 2);
  EXPECT_EQ(count_satisfied(std::vector<double>{10, 10, 5, 5, 5}, 7.0), 2);
}

TEST(QLearning, RewardAtFullFeasibilityIsR) {
  Ctx c = point_mass_ctx({0.0, 100.0}, 1);
  c.arrivals = {request(0, 0, Service::kURLLC, 2.0, 5)};
  QTable t;
  QState s;
  s.arrival_type = 0;
  s.cf = 5;
  t.at(s, 0).q = -1.0;
  const QStepResult r = pql_step(t, c.get(1), 0.5, 0.0);
  EXPECT_EQ(r.admitted, (Admitted{0}));
  EXPECT_EQ(t.get(s, 1).q, 50.0);
  EXPECT_EQ(t.get(s, 1).o, 1);
}

TEST(QLearning, RiskPenalizedRewardAndFirstVisitUpdate) {
  Ctx c = point_mass_ctx({0.0, 100.0}, 0);
  c.arrivals = {request(0, 0, Service::kURLLC, 2.0, 5)};
  ASSERT_EQ(c.arrivals[0].reward, 100.0);
  QTable t;
  QState s;
  s.arrival_type = 0;
  s.cf = 0;
  t.at(s, 0).q = -1.0;
  const QStepResult r = pql_step(t, c.get(0), 0.5, 0.0);
  EXPECT_EQ(r.admitted, (Admitted{0}));
  EXPECT_EQ(t.get(s, 1).q, 25.0);
  EXPECT_EQ(t.get(s, 1).o, 1);
  ASSERT_EQ(r.deltas.size(), 1u);
  EXPECT_EQ(r.deltas[0], 25.0);
}

TEST(QLearning, AlphaSequence) {
  Ctx c = point_mass_ctx({0.0, 100.0}, 1);
  c.arrivals = {request(0, 0, Service::kURLLC, 2.0, 5)};
  QTable t;
  QState s;
  s.arrival_type = 0;
  s.cf = 5;
  t.at(s, 0).q = -1.0;
  double q = 0.0;
  for (int o = 1; o <= 12; ++o) {
    pql_step(t, c.get(1), 0.5, 0.0);
    const double alpha = 0.5 / o;
    q = q + alpha * (100.0 - q);
    EXPECT_EQ(t.get(s, 1).q, q);
    EXPECT_EQ(t.get(s, 1).o, o);
  }
}

TEST(QLearning, FixedPointIsStable) {
  Ctx c = point_mass_ctx({0.0, 100.0}, 1);
  c.arrivals = {request(0, 0, Service::kURLLC, 2.0, 5), request(1, 0, Service::kBE, 0.4, 5)};
  QTable t;
  QState s;
  s.arrival_type = 0;
  s.cf = 5;
  QState next = s;
  next.counts[0] = 1;
  next.arrival_type = 8;
  next.cf = 5;
  t.at(next, 0).q = 7.0;
  t.at(s, 1) = {107.0, 3};
  const QStepResult r = pql_step(t, c.get(1), 0.5, 0.0);
  EXPECT_EQ(t.get(s, 1).q, 107.0);
  EXPECT_EQ(r.deltas.front(), 0.0);
}

TEST(QLearning, TiesRejectAndFrozenTableIsReadOnly) {
  Ctx c = point_mass_ctx({0.0, 100.0}, 1);
  c.arrivals = {request(0, 0, Service::kURLLC, 2.0, 5)};
  QTable t;
  const QStepResult r = pql_step(t, c.get(1), 0.5, 0.0, false);
  EXPECT_TRUE(r.admitted.empty());
  EXPECT_EQ(t.size(), 0u);
  EXPECT_TRUE(r.deltas.empty());
}

TEST(QLearning, GreedyStepIsDeterministic) {
  std::mt19937_64 rng(50);
  QTable t;
  Ctx c = point_mass_ctx({0.0, 30.0, 60.0}, 2);
  for (int i = 0; i < 8; ++i) c.arrivals.push_back(request(i, 0, static_cast<Service>(i % 3), 8.8, 4));
  for (int k = 0; k < 200; ++k) pql_step(t, c.get(k % 3), 0.5, 0.5);
  const QTable before = t;
  for (int l = 0; l < 3; ++l) {
    c.rng.seed(1);
    const Admitted a = pql_step(t, c.get(l), 0.5, 0.0, false).admitted;
    c.rng.seed(2);
    EXPECT_EQ(a, pql_step(t, c.get(l), 0.5, 0.0, false).admitted);
  }
  EXPECT_TRUE(t == before);
}

TEST(QLearning, NaiveCfIgnoresForecast) {
  Ctx a = point_mass_ctx({0.0, 10.0, 20.0}, 2);
  Ctx b = point_mass_ctx({0.0, 10.0, 20.0}, 2);
  b.pmf = CapacityPmf::point_mass(0, 3, 5);
  a.arrivals = {request(0, 0, Service::kEMBB, 8.8, 3)};
  b.arrivals = a.arrivals;
  auto cf_of = [](const QTable& t) {
    int cf = -1;
    for (int v = 0; v <= 5; ++v) {
      QState s;
      s.arrival_type = 4;
      s.cf = v;
      if (t.get(s, 0).o + t.get(s, 1).o > 0) cf = v;
    }
    return cf;
  };
  QTable na, nb, pa, pb;
  a.rng.seed(1);
  b.rng.seed(1);
  naive_ql_step(na, a.get(2), 0.5, 0.0);
  naive_ql_step(nb, b.get(2), 0.5, 0.0);
  pql_step(pa, a.get(2), 0.5, 0.0);
  pql_step(pb, b.get(2), 0.5, 0.0);
  EXPECT_EQ(cf_of(na), 5);
  EXPECT_EQ(cf_of(nb), 5);
  EXPECT_EQ(cf_of(pa), 5);
  EXPECT_EQ(cf_of(pb), 0);
}

TEST(QLearning, StateKeyAndTableRoundTrip) {
  QState s;
  s.counts[3] = 15;
  s.counts[11] = 2;
  s.arrival_type = 7;
  s.cf = 4;
  EXPECT_EQ(s.key(), "0,0,0,15,0,0,0,0,0,0,0,2|7|4");
  EXPECT_EQ(QState::from_key(s.key()), s);
  QTable t;
  t.at(s, 1) = {-3.25, 4};
  t.at(QState{}, 0) = {1.0 / 3.0, 1};
  EXPECT_TRUE(QTable::parse(t.serialize()) == t);
  EXPECT_EQ(QTable::parse(t.serialize()).serialize(), t.serialize());
}

TEST(QLearning, CountsAreCapped) {
  Ctx c = point_mass_ctx({0.0, 1000.0}, 1);
  for (int i = 0; i < 20; ++i) c.active.push_back(request(i, 0, Service::kBE, 0.4, 5));
  c.arrivals = {request(20, 1, Service::kBE, 0.4, 5)};
  QTable t;
  pql_step(t, c.get(1), 0.5, 0.0);
  QState s;
  s.counts[8] = 15;
  s.arrival_type = 8;
  s.cf = 5;
  EXPECT_EQ(t.get(s, 0).o, 1);
}

TEST(QLearner, EpsilonDecaysPerBatchAndFreezes) {
  QLearningParams p;
  p.epsilon_decay = 0.5;
  p.epsilon_min = 0.1;
  QLearner learner(true, p);
  Ctx c = point_mass_ctx({0.0, 100.0}, 1);
  c.arrivals = {request(0, 0, Service::kURLLC, 2.0, 5)};
  learner.step(c.get(1));
  EXPECT_EQ(learner.epsilon(), 0.5);
  learner.step(c.get(1));
  learner.step(c.get(1));
  learner.step(c.get(1));
  EXPECT_EQ(learner.epsilon(), 0.1);
  EXPECT_EQ(learner.updates(), 4);
  learner.freeze();
  const QTable before = learner.table();
  learner.step(c.get(1));
  EXPECT_EQ(learner.updates(), 4);
  EXPECT_TRUE(learner.table() == before);
}

TEST(PolicyRegistry, Names) {
  for (const char* n : {"random", "naive_greedy", "lo", "naive_ql", "pql", "admit_all"}) EXPECT_TRUE(is_policy_name(n));
  EXPECT_FALSE(is_policy_name("oracle"));
}

}  // namespace
}  // namespace slicead
