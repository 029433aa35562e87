#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slicead/link_capacity.hpp"
#include "slicead/slicing.hpp"

namespace slicead {

inline constexpr double kDefaultDelta = 1e-6;

// One simulation instance: a realized capacity series, the RSL it was
// derived from (needed by forecasters), and the chronological requests.
struct Scenario {
  std::string name;
  AcmTable table = AcmTable::bundled("af60");
  CapacitySeries capacity;     // slot t = 0 .. horizon-1
  std::optional<RslTrace> rsl;  // aligned with `capacity` when present
  std::vector<SliceRequest> requests;
  double delta = kDefaultDelta;  // underprovisioning gate threshold
  double cv = 0.0;               // volatility label

  int horizon() const { return static_cast<int>(capacity.size()); }
  // Throws kInvalidArgument on inconsistent content.
  void validate() const;
};

// Builds a scenario from an RSL trace: optional normalization onto the
// table, ACM mapping, and the CV label of the raw trace.
Scenario make_scenario(std::string name, const RslTrace& rsl, AcmTable table,
                       std::vector<SliceRequest> requests, bool normalize = true,
                       double delta = kDefaultDelta);

// Capacity CSV `t,level,capacity_mbps`.
CapacitySeries parse_capacity_series(std::string_view csv_text, const AcmTable& table);
std::string capacity_series_to_csv(const CapacitySeries& series);

// JSON-lines bundle; each line names one scenario:
//   {"name", "acm_table", "rsl_csv" | "capacity_csv", "sr_csv" | "flows_csv",
//    "catalog_csv"?, "kappa"?, "delta"?, "normalize"?}
// Relative paths resolve against the bundle's directory.
std::vector<Scenario> load_scenario_bundle(const std::filesystem::path& path,
                                           double default_kappa = kDefaultKappa);

}  // namespace slicead
