#include "urlbench/csv.hpp"

#include <fstream>
#include <sstream>

#include "urlbench/errors.hpp"

namespace urlbench::csv {

std::vector<Row> parse(const std::string& text) {
  std::vector<Row> rows;
  std::vector<std::string> fields;
  std::string field;
  size_t line = 1;
  size_t record_line = 1;
  bool in_quotes = false;
  bool any = false;  // current record has content

  auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    rows.push_back(Row{std::move(fields), record_line});
    fields.clear();
    any = false;
    record_line = line;
  };

  for (size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      any = true;
      continue;
    }
    switch (ch) {
      case '"':
        in_quotes = true;
        any = true;
        break;
      case ',':
        end_field();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        if (any || !field.empty() || !fields.empty()) end_record();
        record_line = line;
        break;
      default:
        field.push_back(ch);
        any = true;
        break;
    }
  }
  if (in_quotes) throw MalformedRowError(record_line, "unterminated quoted field");
  if (any || !field.empty() || !fields.empty()) end_record();
  return rows;
}

std::vector<Row> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string escape_field(const std::string& field) {
  bool needs = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out += "\"";
  return out;
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape_field(fields[i]);
  }
  return out;
}

}  // namespace urlbench::csv
