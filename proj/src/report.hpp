#pragma once

#include <optional>
#include <string>
#include <vector>

namespace morpho {

struct ReportCell {
  double value = 0.0;
  std::optional<double> spread;  // rendered as "value ± spread"
  bool significant = false;      // differs significantly from the baseline row
};

struct ReportRow {
  std::string label;
  std::string config_hash;
  std::vector<ReportCell> cells;
};

// A results table. In the text rendering the best value of each column is
// wrapped in **..** and a significant difference in _.._; the CSV rendering
// carries the same information as explicit columns.
struct ReportTable {
  std::string title;
  std::vector<std::string> columns;
  std::vector<ReportRow> rows;
  int decimals = 2;
};

// Index of the row holding the largest value of column `col` (the first on
// ties), or -1 for an empty table.
int best_row(const ReportTable& t, std::size_t col);
std::string render_text(const ReportTable& t);
std::string render_csv(const ReportTable& t);

}  // namespace morpho
