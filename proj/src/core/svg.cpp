#include "core/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/errors.hpp"
#include "core/text.hpp"

namespace aist {

namespace {

constexpr double kW = 640, kH = 420;
constexpr double kL = 70, kR = 150, kT = 40, kB = 50;  // margins (legend right)

struct Range {
  double lo = 0.0, hi = 1.0;
};

Range fit(const std::vector<const std::vector<double>*>& cols) {
  Range r;
  bool any = false;
  for (const auto* c : cols)
    for (double v : *c) {
      if (!std::isfinite(v)) continue;
      if (!any) {
        r.lo = r.hi = v;
        any = true;
      } else {
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
      }
    }
  if (!any) return {0.0, 1.0};
  if (r.hi - r.lo < 1e-12) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  const double pad = 0.05 * (r.hi - r.lo);
  return {r.lo - pad, r.hi + pad};
}

std::string num(double v) { return format_double(v); }

}  // namespace

void svg_scatter(const std::string& path, const std::string& title,
                 const std::string& x_label, const std::string& y_label,
                 const std::vector<SvgSeries>& series) {
  std::vector<const std::vector<double>*> xs, ys;
  for (const auto& s : series) {
    xs.push_back(&s.x);
    ys.push_back(&s.y);
  }
  const Range rx = fit(xs), ry = fit(ys);
  const auto px = [&](double v) {
    return kL + (v - rx.lo) / (rx.hi - rx.lo) * (kW - kL - kR);
  };
  const auto py = [&](double v) {
    return kH - kB - (v - ry.lo) / (ry.hi - ry.lo) * (kH - kT - kB);
  };

  std::ostringstream o;
  o << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
    << "' font-family='sans-serif' font-size='12'>\n";
  o << "<rect width='100%' height='100%' fill='white'/>\n";
  o << "<text x='" << kW / 2 << "' y='20' text-anchor='middle' font-size='15'>" << title
    << "</text>\n";
  // axes
  o << "<line x1='" << kL << "' y1='" << kT << "' x2='" << kL << "' y2='" << kH - kB
    << "' stroke='black'/>\n";
  o << "<line x1='" << kL << "' y1='" << kH - kB << "' x2='" << kW - kR << "' y2='"
    << kH - kB << "' stroke='black'/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
    const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
    o << "<text x='" << px(fx) << "' y='" << kH - kB + 16 << "' text-anchor='middle'>"
      << num(fx) << "</text>\n";
    o << "<text x='" << kL - 6 << "' y='" << py(fy) + 4 << "' text-anchor='end'>" << num(fy)
      << "</text>\n";
  }
  o << "<text x='" << (kL + kW - kR) / 2 << "' y='" << kH - 12
    << "' text-anchor='middle'>" << x_label << "</text>\n";
  o << "<text x='18' y='" << (kT + kH - kB) / 2 << "' text-anchor='middle' transform='rotate(-90 18 "
    << (kT + kH - kB) / 2 << ")'>" << y_label << "</text>\n";

  double legend_y = kT + 10;
  for (const auto& s : series) {
    if (s.connect && s.x.size() > 1) {
      o << "<polyline fill='none' stroke='" << s.color << "' points='";
      for (size_t i = 0; i < s.x.size(); ++i) o << px(s.x[i]) << "," << py(s.y[i]) << " ";
      o << "'/>\n";
    }
    for (size_t i = 0; i < s.x.size(); ++i)
      o << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i]) << "' r='4' fill='"
        << s.color << "'/>\n";
    o << "<circle cx='" << kW - kR + 14 << "' cy='" << legend_y << "' r='4' fill='"
      << s.color << "'/>\n";
    o << "<text x='" << kW - kR + 24 << "' y='" << legend_y + 4 << "'>" << s.label
      << "</text>\n";
    legend_y += 18;
  }
  o << "</svg>\n";
  write_text_file(path, o.str());
}

void svg_heatmap(const std::string& path, const std::string& title,
                 const std::vector<std::string>& col_labels,
                 const std::vector<double>& values, size_t rows, size_t cols) {
  if (values.size() != rows * cols) throw InternalError("svg_heatmap: shape mismatch");
  double lo = 0.0, hi = 1.0;
  if (!values.empty()) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
    if (hi - lo < 1e-12) hi = lo + 1.0;
  }
  const double cell_w = std::min(40.0, 520.0 / static_cast<double>(std::max<size_t>(cols, 1)));
  const double cell_h = std::min(14.0, 340.0 / static_cast<double>(std::max<size_t>(rows, 1)));
  const double w = 80 + cell_w * static_cast<double>(cols) + 20;
  const double h = 70 + cell_h * static_cast<double>(rows) + 20;

  std::ostringstream o;
  o << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
    << "' font-family='sans-serif' font-size='11'>\n";
  o << "<rect width='100%' height='100%' fill='white'/>\n";
  o << "<text x='" << w / 2 << "' y='18' text-anchor='middle' font-size='14'>" << title
    << "</text>\n";
  for (size_t c = 0; c < col_labels.size() && c < cols; ++c)
    o << "<text x='" << 80 + (static_cast<double>(c) + 0.5) * cell_w
      << "' y='44' text-anchor='middle'>" << col_labels[c] << "</text>\n";
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      const double v = (values[r * cols + c] - lo) / (hi - lo);
      const int red = 255;
      const int gb = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      o << "<rect x='" << 80 + static_cast<double>(c) * cell_w << "' y='"
        << 50 + static_cast<double>(r) * cell_h << "' width='" << cell_w << "' height='"
        << cell_h << "' fill='rgb(" << red << "," << gb << "," << gb << ")'/>\n";
    }
  }
  o << "</svg>\n";
  write_text_file(path, o.str());
}

}  // namespace aist
