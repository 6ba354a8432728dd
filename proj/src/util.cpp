#include "util.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ps3 {

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 1469598103934665603ull;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ull;
  }
  return hash;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  const std::string content = read_text_file(path);
  return fnv1a64(content.data(), content.size());
}

std::string hex16(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return std::string(buf);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("IoError", "cannot open file for reading: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoError", "cannot open file for writing: " + path);
  out << content;
  if (!out) fail("IoError", "write failed: " + path);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

namespace {
std::vector<std::vector<double>> read_csv_impl(const std::string& path, bool allow_header) {
  std::ifstream in(path);
  if (!in) fail("IoError", "cannot open file for reading: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;
    std::vector<double> row;
    bool parsed = true;
    for (const auto& field : split_csv_line(line)) {
      std::size_t consumed = 0;
      double value = 0;
      try {
        value = std::stod(field, &consumed);
      } catch (const std::exception&) {
        parsed = false;
      }
      if (consumed != field.size()) parsed = false;
      if (!parsed) break;
      row.push_back(value);
    }
    if (!parsed) {
      if (allow_header && first_content_line) {
        first_content_line = false;
        continue;
      }
      fail("ParseError", "non-numeric CSV row '" + line + "' in " + path);
    }
    first_content_line = false;
    rows.push_back(std::move(row));
  }
  return rows;
}
}  // namespace

std::vector<std::vector<double>> read_numeric_csv(const std::string& path) {
  return read_csv_impl(path, /*allow_header=*/false);
}

std::vector<std::vector<double>> read_numeric_csv_with_header(const std::string& path) {
  return read_csv_impl(path, /*allow_header=*/true);
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return std::string(buf);
}

}  // namespace ps3
