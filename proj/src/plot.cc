#include "ctparse/plot.h"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "ctparse/treebank.h"

namespace ctparse {

namespace {

std::string Escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char *kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759",
                                    "#76b7b2", "#edc948", "#b07aa1", "#9c755f"};

}  // namespace

std::string BarChartSvg(const std::string &title, const std::vector<std::string> &categories,
                        const std::vector<BarSeries> &series, double y_max) {
  const double left = 60, right = 20, top = 40, bottom = 90;
  const double group_w = std::max(40.0, 18.0 * static_cast<double>(std::max<std::size_t>(series.size(), 1)) + 12);
  const double plot_w = group_w * static_cast<double>(categories.size());
  const double plot_h = 240;
  const double width = left + plot_w + right + 140;
  const double height = top + plot_h + bottom;
  if (y_max <= 0) y_max = 1;

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      width, height);
  svg += fmt::format("<text x=\"{:.0f}\" y=\"20\" font-size=\"14\">{}</text>\n", left,
                     Escape(title));
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = y_max * tick / 4.0;
    const double y = top + plot_h - plot_h * tick / 4.0;
    svg += fmt::format(
        "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n"
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.2f}</text>\n",
        left, y, left + plot_w, y, left - 6, y + 4, v);
  }
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = left + group_w * static_cast<double>(c);
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = c < series[s].values.size() ? series[s].values[c] : 0.0;
      const double h = plot_h * std::clamp(v / y_max, 0.0, 1.0);
      svg += fmt::format(
          "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"16\" height=\"{:.1f}\" fill=\"{}\">"
          "<title>{} {}: {:.4f}</title></rect>\n",
          gx + 6 + 18.0 * static_cast<double>(s), top + plot_h - h, h, kPalette[s % 8],
          Escape(series[s].name), Escape(categories[c]), v);
    }
    svg += fmt::format(
        "<text transform=\"translate({:.1f},{:.1f}) rotate(-45)\" text-anchor=\"end\">{}</text>\n",
        gx + group_w / 2, top + plot_h + 14, Escape(categories[c]));
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double y = top + 14.0 * static_cast<double>(s);
    svg += fmt::format(
        "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"10\" height=\"10\" fill=\"{}\"/>"
        "<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n",
        left + plot_w + 16, y, kPalette[s % 8], left + plot_w + 30, y + 9,
        Escape(series[s].name));
  }
  svg += "</svg>\n";
  return svg;
}

void WriteText(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

}  // namespace ctparse
