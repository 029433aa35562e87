#include "slicead/oracle.hpp"

#include <random>

#include "gtest/gtest.h"
#include "slicead/error.hpp"
#include "slicead/rate_control.hpp"
#include "support/fixtures.hpp"

namespace slicead {
namespace {

using testing::request;
using testing::scenario_from_levels;
using testing::toy_table;

TEST(EvaluateAdmission, NothingAdmitted) {
  std::mt19937_64 rng(1);
  const Scenario s = testing::random_small_scenario(rng);
  const AdmissionEvaluation e = evaluate_admission_vector(std::vector<std::uint8_t>(s.requests.size(), 0), s);
  EXPECT_EQ(e.objective, 0.0);
  EXPECT_TRUE(e.feasible);
}

TEST(EvaluateAdmission, SingleFittingRequest) {
  const Scenario s = scenario_from_levels(toy_table({0.0, 20.0}), {1, 1, 1, 1},
                                          {request(0, 1, Service::kEMBB, 8.8, 3)});
  const AdmissionEvaluation e = evaluate_admission_vector({1}, s);
  EXPECT_EQ(e.objective, -s.requests[0].reward);
  EXPECT_TRUE(e.feasible);
  EXPECT_THROW(evaluate_admission_vector({1, 0}, s), Error);
}

TEST(EvaluateAdmission, GateBlocksArrivalWhileStarved) {
  const Scenario s = scenario_from_levels(toy_table({0.0, 5.0, 10.0}), {2, 1, 1},
                                          {request(0, 0, Service::kURLLC, 8.0, 3), request(1, 1, Service::kBE, 1.0, 2)});
  EXPECT_FALSE(evaluate_admission_vector({1, 1}, s).feasible);
  EXPECT_TRUE(evaluate_admission_vector({1, 0}, s).feasible);
  EXPECT_TRUE(evaluate_admission_vector({0, 1}, s).feasible);
  const SliceType& a = s.requests[0].type;
  EXPECT_DOUBLE_EQ(evaluate_admission_vector({1, 0}, s).objective, 2 * a.penalty(5.0 / 8.0) - s.requests[0].reward);
}

TEST(SolveOracle, SingleRequestAdmitted) {
  const Scenario s = scenario_from_levels(toy_table({0.0, 20.0}), {1, 1}, {request(0, 0, Service::kBE, 8.8, 2)});
  for (OracleMode m : {OracleMode::kExhaustive, OracleMode::kBranchAndBound}) {
    const OracleSolution sol = solve_oracle(s, m);
    EXPECT_EQ(sol.z, (std::vector<std::uint8_t>{1}));
    EXPECT_EQ(sol.objective, -s.requests[0].reward);
  }
}

TEST(SolveOracle, PicksHigherRewardWhenOnlyOneFits) {
  const Scenario s = scenario_from_levels(
      toy_table({0.0, 10.0}), {1, 1, 1},
      {request(0, 0, Service::kURLLC, 10.0, 3, 50.0), request(1, 0, Service::kEMBB, 10.0, 3, 50.0)});
  for (OracleMode m : {OracleMode::kExhaustive, OracleMode::kBranchAndBound})
    EXPECT_EQ(solve_oracle(s, m).z, (std::vector<std::uint8_t>{1, 0}));
}

TEST(SolveOracle, TiesGoToLexicographicallySmallest) {
  const Scenario s = scenario_from_levels(
      toy_table({0.0, 10.0}), {1, 1, 1},
      {request(0, 0, Service::kURLLC, 10.0, 3, 50.0), request(1, 0, Service::kURLLC, 10.0, 3, 50.0)});
  for (OracleMode m : {OracleMode::kExhaustive, OracleMode::kBranchAndBound})
    EXPECT_EQ(solve_oracle(s, m).z, (std::vector<std::uint8_t>{0, 1}));
}

TEST(SolveOracle, ExhaustiveRefusesLargeInstances) {
  std::vector<SliceRequest> reqs;
  for (int i = 0; i < 21; ++i) reqs.push_back(request(i, 0, Service::kBE, 0.4, 1));
  const Scenario s = scenario_from_levels(toy_table({0.0, 10.0}), {1}, reqs);
  try {
    solve_oracle(s, OracleMode::kExhaustive);
    FAIL() << "expected InstanceTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInstanceTooLarge);
  }
  EXPECT_EQ(solve_oracle(s, OracleMode::kBranchAndBound).z, std::vector<std::uint8_t>(21, 1));
}

TEST(SolveOracle, BranchAndBoundMatchesExhaustive) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario s = testing::random_small_scenario(rng);
    const OracleSolution ex = solve_oracle(s, OracleMode::kExhaustive);
    const OracleSolution bb = solve_oracle(s, OracleMode::kBranchAndBound);
    EXPECT_EQ(bb.objective, ex.objective);
    EXPECT_EQ(bb.z, ex.z);
    EXPECT_LE(bb.evaluated, ex.evaluated + s.requests.size() * 2 + 1);
  }
}

TEST(SolveOracle, OptimumDominatesEveryFeasibleVector) {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 10; ++trial) {
    testing::RandomScenarioLimits lim;
    lim.max_requests = 8;
    const Scenario s = testing::random_small_scenario(rng, lim);
    const double best = solve_oracle(s, OracleMode::kBranchAndBound).objective;
    const std::size_t n = s.requests.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      std::vector<std::uint8_t> z(n);
      for (std::size_t i = 0; i < n; ++i) z[i] = mask >> i & 1;
      const AdmissionEvaluation e = evaluate_admission_vector(z, s);
      if (e.feasible) EXPECT_LE(best, e.objective);
    }
  }
}

TEST(SolveOracle, FractionsDescribeTheOptimum) {
  std::mt19937_64 rng(79);
  const Scenario s = testing::random_small_scenario(rng);
  const OracleSolution sol = solve_oracle(s, OracleMode::kBranchAndBound);
  double penalty = 0.0, reward = 0.0;
  for (const SlotFraction& f : sol.fractions) {
    EXPECT_GE(f.fraction, 0.0);
    EXPECT_LE(f.fraction, 1.0);
    EXPECT_TRUE(sol.z[static_cast<std::size_t>(f.sr_index)]);
    penalty += f.penalty;
  }
  for (std::size_t i = 0; i < sol.z.size(); ++i)
    if (sol.z[i]) reward += s.requests[i].reward;
  EXPECT_NEAR(penalty - reward, sol.objective, 1e-9);
}

// Joint grid enumeration over fractions in every slot for every z.
TEST(SolveOracle, DecompositionMatchesGridMilp) {
  std::mt19937_64 rng(80);
  const AcmTable table = toy_table({0.0, 5.0, 10.0, 15.0});
  for (int trial = 0; trial < 30; ++trial) {
    const int slots = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<int> levels;
    for (int t = 0; t < slots; ++t) levels.push_back(std::uniform_int_distribution<int>(0, 3)(rng));
    std::vector<SliceRequest> reqs;
    const int n = std::uniform_int_distribution<int>(1, 2)(rng);
    for (int i = 0; i < n; ++i) {
      const int start = std::uniform_int_distribution<int>(0, slots - 1)(rng);
      const int dur = std::uniform_int_distribution<int>(1, slots - start)(rng);
      reqs.push_back(request(i, start, static_cast<Service>(std::uniform_int_distribution<int>(0, 2)(rng)), 10.0, dur));
    }
    const Scenario s = scenario_from_levels(table, levels, reqs);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      std::vector<std::uint8_t> z(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = mask >> i & 1;
      double grid_penalty = 0.0, reward = 0.0;
      for (int i = 0; i < n; ++i)
        if (z[static_cast<std::size_t>(i)]) reward += s.requests[static_cast<std::size_t>(i)].reward;
      for (int t = 0; t < slots; ++t) {
        std::vector<testing::GridSlice> active;
        for (const SliceRequest& r : s.requests)
          if (z[static_cast<std::size_t>(r.index)] && r.arrival_slot <= t && t < r.end_slot()) {
            const auto seg = penalty_coefficients(kDefaultKappa, r.type.price);
            active.push_back({r.demand(), {seg[0], seg[1]}});
          }
        grid_penalty += testing::grid_brute_force(active, s.capacity[static_cast<std::size_t>(t)].capacity_mbps, 20);
      }
      const AdmissionEvaluation e = evaluate_admission_vector(z, s);
      if (e.feasible) EXPECT_NEAR(e.objective, grid_penalty - reward, 1e-9) << "mask " << mask;
    }
  }
}

TEST(OracleIo, CsvAndModeNames) {
  EXPECT_EQ(admission_vector_to_csv({1, 0}), "sr_index,z\n0,1\n1,0\n");
  EXPECT_EQ(slot_fractions_to_csv({{3, 1, 0.5, 1.25}}), "t,sr_index,f,penalty\n3,1,0.5,1.25\n");
  EXPECT_EQ(parse_oracle_mode("bnb"), OracleMode::kBranchAndBound);
  EXPECT_EQ(parse_oracle_mode("exhaustive"), OracleMode::kExhaustive);
  EXPECT_THROW(parse_oracle_mode("milp"), Error);
}

}  // namespace
}  // namespace slicead
