#pragma once

// Minimal CSV helpers shared by the file formats in this project. All
// formats are comma separated, UTF-8, LF terminated, with a fixed header.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace slicead::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string_view> fields;
};

// Splits `text` into rows, verifies the header and the field count of every
// row. Blank trailing lines are ignored. Views point into `text`.
std::vector<Row> parse(std::string_view text, std::string_view expected_header);

// Strict numeric parsing; throws Error(kMalformedRow) naming the line.
double to_double(std::string_view field, std::size_t line);
std::int64_t to_int(std::string_view field, std::size_t line);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);
// Writes via a temporary file and rename so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace slicead::csv
