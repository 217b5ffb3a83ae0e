// Minimal SVG bar charts for reports.

#ifndef CTPARSE_PLOT_H_
#define CTPARSE_PLOT_H_

#include <string>
#include <vector>

namespace ctparse {

struct BarSeries {
  std::string name;
  std::vector<double> values;  // one per category
};

// Grouped vertical bars. Values are drawn against a [0, y_max] axis.
std::string BarChartSvg(const std::string &title, const std::vector<std::string> &categories,
                        const std::vector<BarSeries> &series, double y_max = 1.0);

void WriteText(const std::string &path, const std::string &text);

}  // namespace ctparse

#endif  // CTPARSE_PLOT_H_
