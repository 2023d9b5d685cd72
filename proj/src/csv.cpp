#include "vmb/csv.hpp"

#include <cstdio>

namespace vmb {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns,
                     std::uint64_t config_hash)
    : path_(path), out_(path), width_(columns.size()) {
  if (!out_) throw Error("CsvWriter: cannot open " + path);
  char hb[24];
  std::snprintf(hb, sizeof hb, "%016llx", static_cast<unsigned long long>(config_hash));
  hash_ = hb;
  for (size_t i = 0; i < columns.size(); ++i) out_ << columns[i] << ",";
  out_ << "config_hash\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw Error("CsvWriter: row width mismatch in " + path_);
  for (const auto& c : cells) out_ << c << ",";
  out_ << hash_ << "\n";
}

}  // namespace vmb
