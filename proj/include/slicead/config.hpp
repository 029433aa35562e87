#pragma once

// Run configuration: a flat, sectioned key-value text file.
//
//   [paths]
//   rsl = "link.csv"
//   [policy]
//   name = "pql"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "slicead/forecast.hpp"
#include "slicead/policies.hpp"
#include "slicead/scenario.hpp"

namespace slicead {

struct RunConfig {
  // [paths]
  std::string rsl;
  std::string capacity;
  std::string acm_table = "af60";
  std::string flows;
  std::string sr;
  std::string catalog;
  std::string forecast;
  std::string calibration;
  std::string qtable;
  std::string bundle;
  // [policy]
  std::string policy = "naive_greedy";
  double lambda = kDefaultLambda;
  double epsilon0 = 1.0;
  double epsilon_decay = 0.999;
  double epsilon_min = 0.01;
  double kappa = kDefaultKappa;
  int lo_threshold = kDefaultLoThreshold;
  double delta = kDefaultDelta;
  // [run]
  int horizon = kDefaultHorizon;
  int lookback = kDefaultLookback;
  std::optional<std::uint64_t> seed;
  std::string output_dir = "out";
  bool normalize = true;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  // Throws kConfig with a message naming the field.
  static RunConfig parse(std::string_view text);
  std::string serialize() const;
  // Sets one `section.key` (or bare key) from its textual value.
  void set(std::string_view key, std::string_view value);
  // Field-level checks; `check_files` also requires referenced files to exist.
  void validate(bool check_files = true) const;
  QLearningParams q_params() const;
};

// Explicit seed, else AWARESAC_SEED, else 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed);

}  // namespace slicead
