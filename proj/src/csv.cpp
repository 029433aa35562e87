#include "slicead/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "slicead/error.hpp"

namespace slicead {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kNonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::kGapInTrace: return "GapInTrace";
    case ErrorCode::kEmptyTrace: return "EmptyTrace";
    case ErrorCode::kEmptyHistory: return "EmptyHistory";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kDegenerateRow: return "DegenerateRow";
    case ErrorCode::kMissingHorizonStep: return "MissingHorizonStep";
    case ErrorCode::kNonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::kDuplicateRow: return "DuplicateRow";
    case ErrorCode::kTooFewFlows: return "TooFewFlows";
    case ErrorCode::kMissingService: return "MissingService";
    case ErrorCode::kUnknownService: return "UnknownService";
    case ErrorCode::kInstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::kForecastMissing: return "ForecastMissing";
  }
  return "Unknown";
}

namespace csv {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::vector<Row> parse(std::string_view text, std::string_view expected_header) {
  std::vector<Row> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  const std::size_t expected_fields = split_fields(expected_header).size();
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (line != expected_header) {
        throw Error(ErrorCode::kMalformedRow,
                    "expected header '" + std::string(expected_header) + "', got '" +
                        std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    Row row{line_no, split_fields(line)};
    if (row.fields.size() != expected_fields) {
      throw Error(ErrorCode::kMalformedRow,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(expected_fields) + " fields, got " +
                      std::to_string(row.fields.size()));
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) {
    throw Error(ErrorCode::kMalformedRow, "missing header '" + std::string(expected_header) + "'");
  }
  return rows;
}

double to_double(std::string_view field, std::size_t line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kMalformedRow,
                "line " + std::to_string(line) + ": not a number: '" + std::string(field) + "'");
  }
  return value;
}

std::int64_t to_int(std::string_view field, std::size_t line) {
  std::int64_t value = 0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kMalformedRow,
                "line " + std::to_string(line) + ": not an integer: '" + std::string(field) + "'");
  }
  return value;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace csv
}  // namespace slicead
