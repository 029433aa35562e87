#pragma once

// Received-signal-level traces and their mapping onto discrete link
// capacities through hysteresis-based adaptive coding and modulation (ACM).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slicead {

struct RslSample {
  std::int64_t timestamp_min = 0;
  double rsl_dbm = 0.0;

  friend bool operator==(const RslSample&, const RslSample&) = default;
};

// One-minute RSL log of a single link. Timestamps are contiguous.
struct RslTrace {
  std::string link_id;
  std::vector<RslSample> samples;

  std::size_t size() const { return samples.size(); }
  std::vector<double> values() const;
};

struct AcmLevel {
  double capacity_mbps = 0.0;
  double up_dbm = 0.0;    // rsl >= up_dbm moves to the next level; +inf on top
  double down_dbm = 0.0;  // rsl <= down_dbm moves to the previous level; -inf on level 0
};

class AcmTable {
 public:
  // Validates ordering of capacities and thresholds; throws kInvalidArgument.
  explicit AcmTable(std::vector<AcmLevel> levels, std::string name = {});

  // CSV `level,capacity_gbps,up_dbm,down_dbm`, rows in any level order.
  static AcmTable parse(std::string_view csv_text, std::string name = {});
  std::string to_csv() const;

  // Bundled tables: "af60" and "wave".
  static AcmTable bundled(std::string_view name);
  // A bundled name or a path to a table CSV.
  static AcmTable load(const std::string& name_or_path);

  int size() const { return static_cast<int>(levels_.size()); }
  int top() const { return size() - 1; }
  const AcmLevel& level(int l) const { return levels_.at(static_cast<std::size_t>(l)); }
  double capacity(int l) const { return level(l).capacity_mbps; }
  double up(int l) const { return level(l).up_dbm; }
  double down(int l) const { return level(l).down_dbm; }
  const std::string& name() const { return name_; }

  // One ACM step: from `current`, apply the down rule to a fixed point, else
  // the up rule to a fixed point.
  int next_level(int current, double rsl_dbm) const;
  // Level reached by climbing from level 0 with the given sample.
  int initial_level(double rsl_dbm) const;

 private:
  std::vector<AcmLevel> levels_;
  std::string name_;
};

struct CapacitySample {
  int level = 0;
  double capacity_mbps = 0.0;

  friend bool operator==(const CapacitySample&, const CapacitySample&) = default;
};

using CapacitySeries = std::vector<CapacitySample>;

// Throws kMalformedRow, kNonMonotonicTime, kGapInTrace, kEmptyTrace.
RslTrace ingest_rsl_trace(std::string_view csv_text, std::string link_id);
std::string export_rsl_trace(const RslTrace& trace);

// `initial_level` defaults to AcmTable::initial_level(first sample).
CapacitySeries map_rsl_to_capacity(const RslTrace& trace, const AcmTable& table,
                                   std::optional<int> initial_level = std::nullopt);

// |population stddev / mean| per non-overlapping window of `window` samples.
// A trailing partial window is dropped. A zero mean yields +infinity.
std::vector<double> coefficient_of_variation(const RslTrace& trace, int window);

// Mean of the finite per-window CVs; the scenario-level volatility label.
double scenario_cv(const RslTrace& trace, int window = 60);

struct SyntheticRslParams {
  double baseline_dbm = -48.0;
  int event_count = 0;
  double event_depth_db = 0.0;
  int event_duration_min = 30;
  double noise_std_db = 0.0;
};

// Baseline plus Gaussian noise with `event_count` raised-cosine fades.
RslTrace generate_synthetic_rsl(const SyntheticRslParams& params, int length, std::uint64_t seed,
                                std::string link_id = "synthetic");

// Shifts the trace so its median sits 4 dB above the top level's down
// threshold, aligning links with different installation offsets.
RslTrace normalize_to_table(const RslTrace& trace, const AcmTable& table);

}  // namespace slicead
