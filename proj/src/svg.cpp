#include "grokdyn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace grokdyn::svg {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 55;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  if (v != 0.0 && (std::abs(v) >= 1e4 || std::abs(v) < 1e-2)) {
    std::snprintf(buf, sizeof buf, "%.0e", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.3g", v);
  }
  return buf;
}

std::string escape(const std::string& s) {
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

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double norm(double v) const {
    if (log) {
      return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
    }
    return (v - lo) / (hi - lo);
  }
  bool accepts(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

Axis fit_axis(const std::vector<const std::vector<double>*>& data, bool log) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto* v : data) {
    for (double x : *v) {
      if (!std::isfinite(x) || (log && x <= 0.0)) continue;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (!std::isfinite(lo)) {
    lo = log ? 1.0 : 0.0;
    hi = log ? 10.0 : 1.0;
  }
  if (hi == lo) {
    if (log) {
      lo /= 10.0;
      hi *= 10.0;
    } else {
      const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
      lo -= pad;
      hi += pad;
    }
  }
  return {lo, hi, log};
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> t;
  if (a.log) {
    for (double e = std::floor(std::log10(a.lo)); e <= std::ceil(std::log10(a.hi)); e += 1.0) {
      const double v = std::pow(10.0, e);
      if (v >= a.lo * (1 - 1e-9) && v <= a.hi * (1 + 1e-9)) t.push_back(v);
    }
    if (t.empty()) t = {a.lo, a.hi};
    return t;
  }
  for (int i = 0; i <= 5; ++i) t.push_back(a.lo + (a.hi - a.lo) * i / 5.0);
  return t;
}

void header(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"15\">" << escape(title) << "</text>\n";
}

}  // namespace

std::string palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return colors[i % (sizeof colors / sizeof colors[0])];
}

std::string render(const LinePlot& plot) {
  std::vector<const std::vector<double>*> xs;
  std::vector<const std::vector<double>*> ys;
  for (const auto& s : plot.series) {
    xs.push_back(&s.x);
    ys.push_back(&s.y);
  }
  if (xs.empty()) {
    for (const auto& s : plot.overlays) {
      xs.push_back(&s.x);
      ys.push_back(&s.y);
    }
  }
  const Axis ax = fit_axis(xs, plot.log_x);
  const Axis ay = fit_axis(ys, plot.log_y);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + ax.norm(v) * pw; };
  auto py = [&](double v) { return kTop + (1.0 - ay.norm(v)) * ph; };

  std::ostringstream os;
  header(os, plot.title);
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double t : ticks(ax)) {
    os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px(t))
       << "\" y2=\"" << num(kTop + ph + 5) << "\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kTop + ph + 18)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << tick_label(t) << "</text>\n";
  }
  for (double t : ticks(ay)) {
    os << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(kLeft)
       << "\" y2=\"" << num(py(t)) << "\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(t) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(t)
       << "</text>\n";
  }
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 12)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
     << escape(plot.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << num(kTop + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
     << escape(plot.y_label) << "</text>\n";
  os << "<clipPath id=\"plot\"><rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop)
     << "\" width=\"" << num(pw) << "\" height=\"" << num(ph) << "\"/></clipPath>\n";

  auto draw = [&](const Series& s, const std::string& dash) {
    std::ostringstream pts;
    std::size_t count = 0;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.accepts(s.x[i]) || !ay.accepts(s.y[i])) continue;
      pts << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
      ++count;
    }
    if (count == 0) return;
    if (count == 1 || s.markers) {
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
        if (!ax.accepts(s.x[i]) || !ay.accepts(s.y[i])) continue;
        os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
           << "\" r=\"3\" fill=\"" << s.color << "\" fill-opacity=\"" << num(s.opacity)
           << "\" clip-path=\"url(#plot)\"/>\n";
      }
      if (count == 1) return;
    }
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-opacity=\""
       << num(s.opacity) << "\" stroke-width=\"" << num(s.width) << "\"" << dash
       << " clip-path=\"url(#plot)\" points=\"" << pts.str() << "\"/>\n";
  };
  for (const auto& s : plot.overlays) draw(s, " stroke-dasharray=\"6,4\"");
  for (const auto& s : plot.series) draw(s, "");

  double ly = kTop + 14;
  for (const auto& s : plot.series) {
    if (s.label.empty()) continue;
    os << "<line x1=\"" << num(kLeft + pw - 120) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
       << num(kLeft + pw - 100) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(kLeft + pw - 95) << "\" y=\"" << num(ly)
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label) << "</text>\n";
    ly += 15;
  }
  os << "</svg>\n";
  return os.str();
}

std::string render(const BarChart& chart) {
  double hi = 0.0;
  for (const auto& g : chart.groups) {
    for (double v : g.values) {
      if (std::isfinite(v)) hi = std::max(hi, v);
    }
  }
  if (hi <= 0.0) hi = 1.0;
  const Axis ay{0.0, hi * 1.05, false};
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const std::size_t ncat = std::max<std::size_t>(1, chart.categories.size());
  const std::size_t ngroup = std::max<std::size_t>(1, chart.groups.size());
  const double slot = pw / static_cast<double>(ncat);
  const double bar = slot * 0.8 / static_cast<double>(ngroup);

  std::ostringstream os;
  header(os, chart.title);
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double t : ticks(ay)) {
    const double y = kTop + (1.0 - ay.norm(t)) * ph;
    os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(t)
       << "</text>\n";
  }
  for (std::size_t g = 0; g < chart.groups.size(); ++g) {
    const auto& grp = chart.groups[g];
    for (std::size_t c = 0; c < grp.values.size() && c < ncat; ++c) {
      const double v = std::isfinite(grp.values[c]) ? grp.values[c] : 0.0;
      const double h = ay.norm(v) * ph;
      const double x = kLeft + slot * static_cast<double>(c) + slot * 0.1 + bar * static_cast<double>(g);
      os << "<rect x=\"" << num(x) << "\" y=\"" << num(kTop + ph - h) << "\" width=\""
         << num(bar) << "\" height=\"" << num(h) << "\" fill=\""
         << (grp.color.empty() ? palette(g) : grp.color) << "\"/>\n";
    }
  }
  for (std::size_t c = 0; c < chart.categories.size(); ++c) {
    os << "<text x=\"" << num(kLeft + slot * (static_cast<double>(c) + 0.5)) << "\" y=\""
       << num(kTop + ph + 16) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"10\">" << escape(chart.categories[c]) << "</text>\n";
  }
  os << "<text transform=\"translate(16," << num(kTop + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
     << escape(chart.y_label) << "</text>\n";
  double ly = kTop + 14;
  for (std::size_t g = 0; g < chart.groups.size(); ++g) {
    const auto& grp = chart.groups[g];
    os << "<rect x=\"" << num(kLeft + pw - 120) << "\" y=\"" << num(ly - 10)
       << "\" width=\"12\" height=\"10\" fill=\"" << (grp.color.empty() ? palette(g) : grp.color)
       << "\"/>\n";
    os << "<text x=\"" << num(kLeft + pw - 102) << "\" y=\"" << num(ly)
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(grp.label) << "</text>\n";
    ly += 15;
  }
  os << "</svg>\n";
  return os.str();
}

std::string render(const Heatmap& map) {
  const Index n = map.values.rows();
  const Index m = map.values.cols();
  const double size = std::min(kWidth - kLeft - kRight, kHeight - kTop - kBottom);
  const double cw = m > 0 ? size / static_cast<double>(m) : size;
  const double ch = n > 0 ? size / static_cast<double>(n) : size;
  std::ostringstream os;
  header(os, map.title);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      double v = map.values(i, j);
      if (!std::isfinite(v)) v = 0.0;
      v = std::clamp(v, 0.0, 1.0);
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02xff", shade, shade);
      os << "<rect x=\"" << num(kLeft + cw * static_cast<double>(j)) << "\" y=\""
         << num(kTop + ch * static_cast<double>(i)) << "\" width=\"" << num(cw) << "\" height=\""
         << num(ch) << "\" fill=\"" << fill << "\"/>\n";
    }
    if (static_cast<std::size_t>(i) < map.row_labels.size()) {
      os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(kTop + ch * (static_cast<double>(i) + 0.7))
         << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"9\">"
         << escape(map.row_labels[static_cast<std::size_t>(i)]) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace grokdyn::svg
