#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace advprobe {
namespace io {

inline constexpr const char* kCsvVersionLine = "# advprobe-csv v1";

// Shortest decimal that parses back to the same double; '.' decimal
// separator regardless of locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// CSV v1: version comment first, then a header row; comma separated,
// LF line endings, no timestamps.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {
    out_ << kCsvVersionLine << "\n";
  }

  void header(const std::vector<std::string>& cells) { row(cells); }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ",";
      out_ << cells[i];
    }
    out_ << "\n";
  }

  void comment(const std::string& text) { out_ << "# " << text << "\n"; }

 private:
  std::ostream& out_;
};

}  // namespace io
}  // namespace advprobe
