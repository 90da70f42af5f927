#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "csv.hpp"

namespace cbm {

struct LineSeries {
  std::string name;
  std::vector<double> y;
  std::string color;
};

/// Minimal standalone SVG line chart with axes, ticks and a legend.
inline void write_line_chart(std::ostream& os, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             std::span<const double> x, std::span<const LineSeries> series) {
  constexpr double W = 720, H = 480, L = 80, R = 20, T = 40, B = 60;
  double x0 = x.empty() ? 0 : x.front(), x1 = x.empty() ? 1 : x.back();
  double y0 = 0, y1 = 0;
  for (const auto& s : series)
    for (double v : s.y) y1 = std::max(y1, v);
  if (y1 <= y0) y1 = y0 + 1;
  if (x1 <= x0) x1 = x0 + 1;
  y1 *= 1.05;
  auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << title << "</text>\n"
     << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
     << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
       << format_number(std::round(xv * 100) / 100) << "</text>\n"
       << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
       << format_number(std::round(yv * 1000) / 1000) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">"
     << x_label << "</text>\n"
     << "<text transform=\"translate(18," << (T + H - B) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << y_label << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const LineSeries& s = series[k];
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < std::min(x.size(), s.y.size()); ++i)
      os << format_number(px(x[i])) << ',' << format_number(py(s.y[i])) << ' ';
    os << "\"/>\n";
    const double ly = T + 16 + 16.0 * static_cast<double>(k);
    os << "<line x1=\"" << W - R - 130 << "\" y1=\"" << ly << "\" x2=\"" << W - R - 110
       << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << W - R - 104 << "\" y=\"" << ly + 4 << "\">" << s.name << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace cbm
