#pragma once

// Plain table rendering shared by the report writers.

#include <algorithm>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vtg/core.hpp"
#include "vtg/error.hpp"

namespace vtg {

enum class RenderFormat { AlignedText, Csv, Markdown };

inline RenderFormat parse_render_format(std::string_view s) {
  const std::string k = detail::lower(s);
  if (k == "aligned-text" || k == "text" || k == "aligned") return RenderFormat::AlignedText;
  if (k == "comma-separated" || k == "csv") return RenderFormat::Csv;
  if (k == "markdown-table" || k == "markdown" || k == "md") return RenderFormat::Markdown;
  throw ValidationError("unknown render format '" + std::string(s) + "'");
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// header + rows; numeric columns are right-aligned in the text format.
inline std::string render_grid(const std::vector<std::string>& header,
                               const std::vector<std::vector<std::string>>& rows, RenderFormat fmt) {
  std::ostringstream out;
  if (fmt == RenderFormat::Csv) {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out.str();
  }
  if (fmt == RenderFormat::Markdown) {
    auto line = [&](const std::vector<std::string>& cells) {
      out << '|';
      for (const auto& c : cells) out << ' ' << c << " |";
      out << '\n';
    };
    line(header);
    out << '|';
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? " ---: |" : " --- |");
    out << '\n';
    for (const auto& r : rows) line(r);
    return out.str();
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string l;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string pad(width[i] - cells[i].size(), ' ');
      if (i) l += "  ";
      l += i == 0 ? cells[i] + pad : pad + cells[i];
    }
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out << l << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (std::size_t i = 0; i < width.size(); ++i) total += width[i] + (i ? 2 : 0);
  out << std::string(total, '-') << '\n';
  for (const auto& r : rows) line(r);
  return out.str();
}

}  // namespace vtg
