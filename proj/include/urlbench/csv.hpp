#pragma once

#include <string>
#include <vector>

namespace urlbench::csv {

struct Row {
  std::vector<std::string> fields;
  size_t line;  // 1-based line the record started on
};

/// RFC 4180 style: quoted fields may contain commas, doubled quotes and
/// newlines. Throws IoError if the file cannot be opened.
std::vector<Row> read_file(const std::string& path);

std::vector<Row> parse(const std::string& text);

/// Quotes a field only when it contains a comma, quote or newline.
std::string escape_field(const std::string& field);

std::string join_row(const std::vector<std::string>& fields);

}  // namespace urlbench::csv
