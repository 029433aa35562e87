#include "slicead/scenario.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "slicead/csv.hpp"
#include "slicead/error.hpp"

namespace slicead {

namespace {
constexpr std::string_view kCapacityHeader = "t,level,capacity_mbps";
}

void Scenario::validate() const {
  if (capacity.empty()) throw Error(ErrorCode::kInvalidArgument, name + ": empty capacity series");
  if (!(delta > 0.0)) throw Error(ErrorCode::kInvalidArgument, name + ": delta must be > 0");
  for (const CapacitySample& c : capacity) {
    if (c.level < 0 || c.level > table.top() || c.capacity_mbps != table.capacity(c.level)) {
      throw Error(ErrorCode::kInvalidArgument, name + ": capacity sample disagrees with ACM table");
    }
  }
  if (rsl && rsl->size() != capacity.size()) {
    throw Error(ErrorCode::kInvalidArgument, name + ": RSL trace and capacity differ in length");
  }
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const SliceRequest& r = requests[i];
    if (r.index != static_cast<int>(i)) {
      throw Error(ErrorCode::kInvalidArgument, name + ": request indices must be 0..N-1");
    }
    if (r.arrival_slot < 0 || r.arrival_slot >= horizon()) {
      throw Error(ErrorCode::kInvalidArgument, name + ": arrival outside the horizon");
    }
    if (i > 0 && r.arrival_slot < requests[i - 1].arrival_slot) {
      throw Error(ErrorCode::kInvalidArgument, name + ": requests must be chronological");
    }
    if (!(r.reward > 0.0) || !(r.demand() > 0.0) || r.duration() < 1) {
      throw Error(ErrorCode::kInvalidArgument, name + ": request needs reward, demand, duration");
    }
  }
}

Scenario make_scenario(std::string name, const RslTrace& rsl, AcmTable table,
                       std::vector<SliceRequest> requests, bool normalize, double delta) {
  Scenario s;
  s.name = std::move(name);
  s.cv = scenario_cv(rsl);
  RslTrace mapped = normalize ? normalize_to_table(rsl, table) : rsl;
  s.capacity = map_rsl_to_capacity(mapped, table);
  s.rsl = std::move(mapped);
  s.table = std::move(table);
  s.requests = std::move(requests);
  s.delta = delta;
  s.validate();
  return s;
}

CapacitySeries parse_capacity_series(std::string_view csv_text, const AcmTable& table) {
  CapacitySeries out;
  for (const csv::Row& row : csv::parse(csv_text, kCapacityHeader)) {
    if (csv::to_int(row.fields[0], row.line) != static_cast<std::int64_t>(out.size())) {
      throw Error(ErrorCode::kGapInTrace, "line " + std::to_string(row.line) + ": slots must be 0..T-1");
    }
    const std::int64_t level = csv::to_int(row.fields[1], row.line);
    if (level < 0 || level > table.top()) {
      throw Error(ErrorCode::kMalformedRow, "line " + std::to_string(row.line) + ": level out of range");
    }
    const double cap = csv::to_double(row.fields[2], row.line);
    const int l = static_cast<int>(level);
    if (std::abs(cap - table.capacity(l)) > 1e-9 * std::max(1.0, cap)) {
      throw Error(ErrorCode::kMalformedRow,
                  "line " + std::to_string(row.line) + ": capacity disagrees with the ACM table");
    }
    out.push_back({l, table.capacity(l)});
  }
  if (out.empty()) throw Error(ErrorCode::kEmptyTrace, "capacity series has no samples");
  return out;
}

std::string capacity_series_to_csv(const CapacitySeries& series) {
  std::string out(kCapacityHeader);
  out += '\n';
  for (std::size_t t = 0; t < series.size(); ++t) {
    out += std::to_string(t) + ',' + std::to_string(series[t].level) + ',' +
           csv::format_double(series[t].capacity_mbps) + '\n';
  }
  return out;
}

std::vector<Scenario> load_scenario_bundle(const std::filesystem::path& path,
                                           double default_kappa) {
  const std::string text = csv::read_file(path);
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  std::vector<Scenario> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRow,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      const std::string name = j.value("name", "scenario" + std::to_string(out.size()));
      AcmTable table = AcmTable::load(j.value("acm_table", std::string("af60")));
      const double kappa = j.value("kappa", default_kappa);
      const double delta = j.value("delta", kDefaultDelta);
      const SliceCatalog catalog =
          j.contains("catalog_csv")
              ? SliceCatalog::parse(csv::read_file(resolve(j.at("catalog_csv").get<std::string>())), kappa)
              : SliceCatalog::canned(kappa);
      std::vector<SliceRequest> requests;
      if (j.contains("sr_csv")) {
        requests = parse_slice_requests(csv::read_file(resolve(j.at("sr_csv").get<std::string>())), catalog);
      } else if (j.contains("flows_csv")) {
        const auto flows = parse_flows(csv::read_file(resolve(j.at("flows_csv").get<std::string>())));
        requests = generate_slice_requests(flows, catalog);
      }
      if (j.contains("rsl_csv")) {
        const RslTrace rsl = ingest_rsl_trace(csv::read_file(resolve(j.at("rsl_csv").get<std::string>())), name);
        out.push_back(make_scenario(name, rsl, std::move(table), std::move(requests),
                                    j.value("normalize", true), delta));
      } else if (j.contains("capacity_csv")) {
        Scenario s;
        s.name = name;
        s.capacity = parse_capacity_series(csv::read_file(resolve(j.at("capacity_csv").get<std::string>())), table);
        s.table = std::move(table);
        s.requests = std::move(requests);
        s.delta = delta;
        s.validate();
        out.push_back(std::move(s));
      } else {
        throw Error(ErrorCode::kConfig, "scenario needs rsl_csv or capacity_csv");
      }
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kConfig, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace slicead
