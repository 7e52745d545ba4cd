#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace iscc {

/// Minimal CSV emitter. Writes the header on construction and one row per
/// call; every row must have exactly as many cells as the header.
class CsvWriter {
public:
  CsvWriter(const std::string& path, std::vector<std::string> header);

  void write_row(const std::vector<std::string>& cells);
  void flush() { out_.flush(); }

  /// Shortest decimal form that round-trips a double ("0.1", not "0.100000").
  static std::string format(double value);
  static std::string format(std::uint64_t value);
  static std::string format(bool value) { return value ? "1" : "0"; }

private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace iscc
