#pragma once

// Perfect-information admission benchmark. With the admission vector fixed
// the per-slot penalties decouple, so the problem reduces to a search over
// binary vectors with an exact per-slot rate-control evaluation.

#include <cstdint>
#include <string>
#include <vector>

#include "slicead/scenario.hpp"

namespace slicead {

inline constexpr int kExhaustiveLimit = 20;

struct AdmissionEvaluation {
  double objective = 0.0;  // total penalty minus total reward
  bool feasible = true;
};

// z[i] != 0 admits request i. Infeasible when an admitted request arrives in
// a slot whose already-active admitted set carries a penalty >= delta.
AdmissionEvaluation evaluate_admission_vector(const std::vector<std::uint8_t>& z,
                                              const Scenario& scenario);

enum class OracleMode { kExhaustive, kBranchAndBound };

struct SlotFraction {
  int t = 0;
  int sr_index = 0;
  double fraction = 1.0;
  double penalty = 0.0;
};

struct OracleSolution {
  std::vector<std::uint8_t> z;
  double objective = 0.0;
  std::vector<SlotFraction> fractions;
  std::uint64_t evaluated = 0;  // number of (partial) vectors evaluated
};

// Global optimum; ties resolve to the lexicographically smallest z.
// Throws kInstanceTooLarge in exhaustive mode when N > 20.
OracleSolution solve_oracle(const Scenario& scenario, OracleMode mode);

OracleMode parse_oracle_mode(std::string_view name);

// `sr_index,z`
std::string admission_vector_to_csv(const std::vector<std::uint8_t>& z);
// `t,sr_index,f,penalty`
std::string slot_fractions_to_csv(const std::vector<SlotFraction>& fractions);

}  // namespace slicead
