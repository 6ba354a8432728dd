#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ps3 {

/// Error with a machine-readable kind tag in front of the message,
/// e.g. "InvalidGear: gear 7 outside {1..6}".
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

[[noreturn]] inline void fail(const std::string& kind, const std::string& message) {
  throw Error(kind, message);
}

/// FNV-1a 64-bit digest, used to stamp outputs with input identities.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex16(std::uint64_t value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Splits one CSV line; no quoting support, fields are plain numbers/words.
std::vector<std::string> split_csv_line(const std::string& line);

/// Parses CSV into rows of doubles, skipping blank lines and '#' comments.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path);

/// Same, but tolerates one leading header line of column names.
std::vector<std::vector<double>> read_numeric_csv_with_header(const std::string& path);

std::string format_double(double value);

}  // namespace ps3
