#pragma once

// Synthetic scenario collections labelled by link volatility.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "slicead/scenario.hpp"

namespace slicead {

inline constexpr std::array<double, 2> kDefaultCvEdges{0.2, 0.6};

// "<0.2", "[0.2,0.6]" or ">0.6" for the default edges.
std::string cv_bucket(double cv, std::array<double, 2> edges = kDefaultCvEdges);
int cv_bucket_index(double cv, std::array<double, 2> edges = kDefaultCvEdges);

struct SuiteOptions {
  int per_bucket = 10;
  int slots = 240;
  std::uint64_t seed = 0;
  std::string table = "af60";
  double kappa = kDefaultKappa;
  SyntheticFlowParams flows{60, {0.1, 0.1, 0.1}, {8.0, 12.0, 5.0}, {2.0, 6.0, 1.0}};  // `slots` is taken from above
};

// per_bucket scenarios for each CV bucket, in bucket order. Requests that
// would outlive the horizon are dropped.
std::vector<Scenario> generate_cv_suite(const SuiteOptions& options);

// One RSL trace whose scenario CV falls into `bucket` (0, 1 or 2).
RslTrace synthetic_trace_for_bucket(int bucket, int slots, std::uint64_t seed);

// Keeps the requests that end within `horizon` and renumbers them.
std::vector<SliceRequest> clip_to_horizon(std::vector<SliceRequest> requests, int horizon);

}  // namespace slicead
