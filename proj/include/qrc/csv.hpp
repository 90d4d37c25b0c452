#pragma once

// Minimal CSV helpers: '.' decimal separator, LF line endings, doubles
// printed with 17 significant digits so they parse back exactly.

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qrc::csv {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\"");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace qrc::csv
