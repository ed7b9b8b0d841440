#include "report.hpp"

#include <algorithm>
#include <cstdio>

#include "common.hpp"

namespace morpho {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Display width in code points, so "±" counts once.
std::size_t width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t w, bool right) {
  const std::string fill(w > width(s) ? w - width(s) : 0, ' ');
  return right ? fill + s : s + fill;
}

}  // namespace

int best_row(const ReportTable& t, std::size_t col) {
  int best = -1;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (col >= t.rows[r].cells.size()) continue;
    if (best < 0 || t.rows[r].cells[col].value > t.rows[std::size_t(best)].cells[col].value) best = int(r);
  }
  return best;
}

std::string render_text(const ReportTable& t) {
  for (const auto& row : t.rows)
    if (row.cells.size() != t.columns.size())
      fail(ErrorCode::InvalidArgument, "report row '" + row.label + "' has the wrong number of cells");
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"", "config"};
  header.insert(header.end(), t.columns.begin(), t.columns.end());
  grid.push_back(header);
  std::vector<int> best(t.columns.size());
  for (std::size_t c = 0; c < t.columns.size(); ++c) best[c] = best_row(t, c);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    std::vector<std::string> line{row.label, row.config_hash};
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
      const auto& cell = row.cells[c];
      std::string s = fixed(cell.value, t.decimals);
      if (cell.spread) s += " ± " + fixed(*cell.spread, t.decimals);
      if (cell.significant) s = "_" + s + "_";
      if (best[c] == int(r)) s = "**" + s + "**";
      line.push_back(std::move(s));
    }
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> w(header.size(), 0);
  for (const auto& line : grid)
    for (std::size_t c = 0; c < line.size(); ++c) w[c] = std::max(w[c], width(line[c]));
  std::string out;
  if (!t.title.empty()) out += t.title + "\n";
  for (const auto& line : grid) {
    std::string text;
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c) text += "  ";
      text += pad(line[c], w[c], c >= 2);
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out += text + "\n";
  }
  return out;
}

std::string render_csv(const ReportTable& t) {
  std::string out = "label,config";
  for (const auto& c : t.columns) {
    out += "," + csv_field(c) + "," + csv_field(c + " sd") + "," + csv_field(c + " best") + "," +
           csv_field(c + " significant");
  }
  out += "\n";
  std::vector<int> best(t.columns.size());
  for (std::size_t c = 0; c < t.columns.size(); ++c) best[c] = best_row(t, c);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    out += csv_field(row.label) + "," + csv_field(row.config_hash);
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
      const auto& cell = row.cells[c];
      out += "," + fixed(cell.value, t.decimals) + "," + (cell.spread ? fixed(*cell.spread, t.decimals) : "") + "," +
             (best[c] == int(r) ? "1" : "0") + "," + (cell.significant ? "1" : "0");
    }
    out += "\n";
  }
  return out;
}

}  // namespace morpho
