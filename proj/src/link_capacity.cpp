#include "slicead/link_capacity.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>

#include "slicead/csv.hpp"
#include "slicead/error.hpp"

namespace slicead {

namespace {

constexpr std::string_view kRslHeader = "timestamp_min,rsl_dbm";
constexpr std::string_view kAcmHeader = "level,capacity_gbps,up_dbm,down_dbm";
constexpr double kInf = std::numeric_limits<double>::infinity();

// Capacity values from the af60 and wave device clusters, Gbps.
struct BundledRow {
  double gbps, up, down;
};

constexpr BundledRow kAf60[] = {
    {0.00, -72.5, -kInf}, {0.20, -69.5, -75.5}, {0.67, -65.5, -71.5}, {0.80, -61.5, -67.5},
    {0.90, -57.5, -63.5}, {0.97, -53.5, -59.5}, {1.20, -49.5, -55.5}, {1.95, kInf, -52.5},
};

constexpr BundledRow kWave[] = {
    {0.00, -73.5, -kInf}, {0.15, -71.5, -76.5}, {0.20, -68.5, -73.5}, {0.42, -65.5, -70.5},
    {0.67, -63.5, -67.5}, {0.88, -60.5, -64.5}, {0.94, -56.5, -62.5}, {1.00, kInf, -59.5},
};

template <std::size_t N>
AcmTable from_rows(const BundledRow (&rows)[N], std::string name) {
  std::vector<AcmLevel> levels;
  for (const BundledRow& r : rows) levels.push_back({r.gbps * 1000.0, r.up, r.down});
  return AcmTable(std::move(levels), std::move(name));
}

}  // namespace

std::vector<double> RslTrace::values() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const RslSample& s : samples) out.push_back(s.rsl_dbm);
  return out;
}

AcmTable::AcmTable(std::vector<AcmLevel> levels, std::string name)
    : levels_(std::move(levels)), name_(std::move(name)) {
  if (levels_.empty()) throw Error(ErrorCode::kInvalidArgument, "ACM table has no levels");
  const int n = size();
  for (int l = 0; l < n; ++l) {
    const AcmLevel& lv = levels_[static_cast<std::size_t>(l)];
    const std::string where = "ACM level " + std::to_string(l);
    if (!std::isfinite(lv.capacity_mbps) || lv.capacity_mbps < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, where + ": capacity must be finite and >= 0");
    }
    if (l == n - 1 ? lv.up_dbm != kInf : !std::isfinite(lv.up_dbm)) {
      throw Error(ErrorCode::kInvalidArgument, where + ": up threshold must be finite (+inf on top)");
    }
    if (l == 0 ? lv.down_dbm != -kInf : !std::isfinite(lv.down_dbm)) {
      throw Error(ErrorCode::kInvalidArgument,
                  where + ": down threshold must be finite (-inf on level 0)");
    }
    if (!(lv.down_dbm < lv.up_dbm)) {
      throw Error(ErrorCode::kInvalidArgument, where + ": down threshold must be below up");
    }
    if (l > 0) {
      const AcmLevel& prev = levels_[static_cast<std::size_t>(l - 1)];
      if (!(prev.capacity_mbps < lv.capacity_mbps)) {
        throw Error(ErrorCode::kInvalidArgument, where + ": capacities must strictly increase");
      }
      if (l < n - 1 && !(prev.up_dbm < lv.up_dbm)) {
        throw Error(ErrorCode::kInvalidArgument, where + ": up thresholds must strictly increase");
      }
      if (l > 1 && !(prev.down_dbm < lv.down_dbm)) {
        throw Error(ErrorCode::kInvalidArgument, where + ": down thresholds must strictly increase");
      }
    }
  }
}

AcmTable AcmTable::parse(std::string_view csv_text, std::string name) {
  const auto rows = csv::parse(csv_text, kAcmHeader);
  std::vector<std::pair<std::int64_t, AcmLevel>> indexed;
  for (const csv::Row& row : rows) {
    const std::int64_t l = csv::to_int(row.fields[0], row.line);
    indexed.push_back({l, AcmLevel{csv::to_double(row.fields[1], row.line) * 1000.0,
                                   csv::to_double(row.fields[2], row.line),
                                   csv::to_double(row.fields[3], row.line)}});
  }
  std::sort(indexed.begin(), indexed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<AcmLevel> levels;
  for (std::size_t i = 0; i < indexed.size(); ++i) {
    if (indexed[i].first != static_cast<std::int64_t>(i)) {
      throw Error(ErrorCode::kInvalidArgument, "ACM table levels must be 0..L-1 without gaps");
    }
    levels.push_back(indexed[i].second);
  }
  return AcmTable(std::move(levels), std::move(name));
}

std::string AcmTable::to_csv() const {
  std::string out(kAcmHeader);
  out += '\n';
  for (int l = 0; l < size(); ++l) {
    out += std::to_string(l) + ',' + csv::format_double(capacity(l) / 1000.0) + ',' +
           csv::format_double(up(l)) + ',' + csv::format_double(down(l)) + '\n';
  }
  return out;
}

AcmTable AcmTable::bundled(std::string_view name) {
  if (name == "af60") return from_rows(kAf60, "af60");
  if (name == "wave") return from_rows(kWave, "wave");
  throw Error(ErrorCode::kInvalidArgument, "no bundled ACM table named '" + std::string(name) + "'");
}

AcmTable AcmTable::load(const std::string& name_or_path) {
  if (name_or_path == "af60" || name_or_path == "wave") return bundled(name_or_path);
  const std::filesystem::path path(name_or_path);
  return parse(csv::read_file(path), path.stem().string());
}

int AcmTable::next_level(int current, double rsl_dbm) const {
  int l = current;
  if (rsl_dbm <= down(l)) {
    while (l > 0 && rsl_dbm <= down(l)) --l;
  } else {
    while (l < top() && rsl_dbm >= up(l)) ++l;
  }
  return l;
}

int AcmTable::initial_level(double rsl_dbm) const {
  int l = 0;
  while (l < top() && rsl_dbm >= up(l)) ++l;
  return l;
}

RslTrace ingest_rsl_trace(std::string_view csv_text, std::string link_id) {
  const auto rows = csv::parse(csv_text, kRslHeader);
  RslTrace trace{std::move(link_id), {}};
  trace.samples.reserve(rows.size());
  for (const csv::Row& row : rows) {
    RslSample s{csv::to_int(row.fields[0], row.line), csv::to_double(row.fields[1], row.line)};
    if (!std::isfinite(s.rsl_dbm)) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(row.line) + ": non-finite rsl");
    }
    if (!trace.samples.empty()) {
      const std::int64_t prev = trace.samples.back().timestamp_min;
      if (s.timestamp_min <= prev) {
        throw Error(ErrorCode::kNonMonotonicTime,
                    "line " + std::to_string(row.line) + ": timestamp " +
                        std::to_string(s.timestamp_min) + " after " + std::to_string(prev));
      }
      if (s.timestamp_min != prev + 1) {
        throw Error(ErrorCode::kGapInTrace, "missing minute(s) between " + std::to_string(prev) +
                                                " and " + std::to_string(s.timestamp_min));
      }
    }
    trace.samples.push_back(s);
  }
  if (trace.samples.empty()) throw Error(ErrorCode::kEmptyTrace, "trace has no samples");
  return trace;
}

std::string export_rsl_trace(const RslTrace& trace) {
  std::string out(kRslHeader);
  out += '\n';
  for (const RslSample& s : trace.samples) {
    out += std::to_string(s.timestamp_min);
    out += ',';
    out += csv::format_double(s.rsl_dbm);
    out += '\n';
  }
  return out;
}

CapacitySeries map_rsl_to_capacity(const RslTrace& trace, const AcmTable& table,
                                   std::optional<int> initial_level) {
  if (trace.samples.empty()) throw Error(ErrorCode::kEmptyTrace, "cannot map an empty trace");
  int level = initial_level.value_or(table.initial_level(trace.samples.front().rsl_dbm));
  if (level < 0 || level > table.top()) {
    throw Error(ErrorCode::kInvalidArgument, "initial level out of range");
  }
  CapacitySeries out;
  out.reserve(trace.size());
  for (const RslSample& s : trace.samples) {
    level = table.next_level(level, s.rsl_dbm);
    out.push_back({level, table.capacity(level)});
  }
  return out;
}

std::vector<double> coefficient_of_variation(const RslTrace& trace, int window) {
  if (window < 2) throw Error(ErrorCode::kInvalidArgument, "CV window must be >= 2");
  if (trace.size() < static_cast<std::size_t>(window)) {
    throw Error(ErrorCode::kInvalidArgument, "trace shorter than CV window");
  }
  std::vector<double> out;
  const std::size_t w = static_cast<std::size_t>(window);
  for (std::size_t start = 0; start + w <= trace.size(); start += w) {
    double mean = 0.0;
    for (std::size_t i = start; i < start + w; ++i) mean += trace.samples[i].rsl_dbm;
    mean /= static_cast<double>(w);
    double var = 0.0;
    for (std::size_t i = start; i < start + w; ++i) {
      const double d = trace.samples[i].rsl_dbm - mean;
      var += d * d;
    }
    var /= static_cast<double>(w);
    out.push_back(mean == 0.0 ? kInf : std::abs(std::sqrt(var) / mean));
  }
  return out;
}

double scenario_cv(const RslTrace& trace, int window) {
  const int w = std::min<int>(window, static_cast<int>(trace.size()));
  const auto cvs = coefficient_of_variation(trace, w);
  double sum = 0.0;
  int n = 0;
  for (double cv : cvs) {
    if (std::isfinite(cv)) {
      sum += cv;
      ++n;
    }
  }
  return n == 0 ? kInf : sum / n;
}

RslTrace generate_synthetic_rsl(const SyntheticRslParams& params, int length, std::uint64_t seed,
                                std::string link_id) {
  if (length <= 0) throw Error(ErrorCode::kInvalidArgument, "length must be positive");
  if (!std::isfinite(params.baseline_dbm) || !std::isfinite(params.event_depth_db) ||
      !std::isfinite(params.noise_std_db) || params.noise_std_db < 0.0 || params.event_count < 0 ||
      params.event_duration_min < 1) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic RSL parameters out of range");
  }
  std::mt19937_64 rng(seed);
  std::vector<double> dip(static_cast<std::size_t>(length), 0.0);
  const int span = params.event_duration_min;
  std::uniform_int_distribution<int> start_dist(0, std::max(0, length - span));
  for (int e = 0; e < params.event_count; ++e) {
    const int start = start_dist(rng);
    for (int k = 0; k <= span && start + k < length; ++k) {
      const double phase = 2.0 * std::numbers::pi * k / span;
      dip[static_cast<std::size_t>(start + k)] += params.event_depth_db * 0.5 * (1.0 - std::cos(phase));
    }
  }
  std::normal_distribution<double> noise(0.0, 1.0);
  RslTrace trace{std::move(link_id), {}};
  trace.samples.reserve(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) {
    const double eps = params.noise_std_db > 0.0 ? params.noise_std_db * noise(rng) : 0.0;
    trace.samples.push_back({t, params.baseline_dbm - dip[static_cast<std::size_t>(t)] + eps});
  }
  return trace;
}

RslTrace normalize_to_table(const RslTrace& trace, const AcmTable& table) {
  if (trace.samples.empty()) throw Error(ErrorCode::kEmptyTrace, "cannot normalize an empty trace");
  std::vector<double> v = trace.values();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const double median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  const double shift = table.down(table.top()) + 4.0 - median;
  RslTrace out = trace;
  for (RslSample& s : out.samples) s.rsl_dbm += shift;
  return out;
}

}  // namespace slicead
