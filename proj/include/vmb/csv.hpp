#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "vmb/velocity.hpp"

namespace vmb {

// 17 significant digits: round-trip exact for doubles.
std::string fmt17(double x);

// Schema columns as listed, plus a trailing config_hash column so every row
// carries its provenance.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns,
            std::uint64_t config_hash);
  // cells.size() must equal the schema width; empty strings for unused cells
  void row(const std::vector<std::string>& cells);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  size_t width_;
  std::string hash_;
};

}  // namespace vmb
