#include "iscc/common/csv.hpp"

#include <charconv>
#include <cstdint>
#include <system_error>

#include "iscc/common/errors.hpp"

namespace iscc {

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> header)
    : out_(path), columns_(header.size()) {
  if (!out_) {
    throw InvalidInput("cannot open CSV output file: " + path);
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw InvalidInput("CSV row has " + std::to_string(cells.size()) +
                       " cells, header has " + std::to_string(columns_));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

std::string CsvWriter::format(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string CsvWriter::format(std::uint64_t value) {
  return std::to_string(value);
}

}  // namespace iscc
