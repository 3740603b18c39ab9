#include "brforest/svg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "brforest/csv.hpp"

namespace brf {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939",
                          "#8c6d31", "#843c39", "#7b4173", "#3182bd", "#e6550d", "#31a354"};

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

void write_br_curves_svg(const std::vector<BRCurve>& curves, std::ostream& out) {
  if (curves.empty() || curves.front().points.empty()) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"10\" height=\"10\"/>\n";
    return;
  }

  const double width = 860, height = 520;
  const double left = 70, right = width - 190, top = 40, bottom = height - 60;

  double br_min = curves[0].points.front().first;
  double br_max = curves[0].points.back().first;
  double acc_min = 1.0, acc_max = 0.0;
  for (const auto& c : curves)
    for (const auto& [br, acc] : c.points) {
      br_min = std::min(br_min, br);
      br_max = std::max(br_max, br);
      acc_min = std::min(acc_min, acc);
      acc_max = std::max(acc_max, acc);
    }
  if (acc_max <= acc_min) {
    acc_min -= 0.01;
    acc_max += 0.01;
  }
  const double pad = (acc_max - acc_min) * 0.05;
  acc_min -= pad;
  acc_max += pad;

  auto sx = [&](double br) { return left + (br - br_min) / (br_max - br_min) * (right - left); };
  auto sy = [&](double acc) {
    return bottom - (acc - acc_min) / (acc_max - acc_min) * (bottom - top);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << curves.front().dataset << "</text>\n";

  // axes
  out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
      << bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n";
  for (const auto& [br, acc] : curves.front().points) {
    out << "<line x1=\"" << sx(br) << "\" y1=\"" << bottom << "\" x2=\"" << sx(br) << "\" y2=\""
        << bottom + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << sx(br) << "\" y=\"" << bottom + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_double(br) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double acc = acc_min + (acc_max - acc_min) * i / 5.0;
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(acc) << "\" x2=\"" << left << "\" y2=\""
        << sy(acc) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 9 << "\" y=\"" << sy(acc) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(acc * 100.0, 1) << "</text>\n";
  }
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">bootstrap rate"
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << (top + bottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << (top + bottom) / 2 << ")\">accuracy [%]</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kPalette[c % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [br, acc] : curves[c].points)
      out << fmt(sx(br), 2) << "," << fmt(sy(acc), 2) << " ";
    out << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(c);
    out << "<line x1=\"" << right + 12 << "\" y1=\"" << ly << "\" x2=\"" << right + 32
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << right + 38 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << curves[c].config << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace brf
