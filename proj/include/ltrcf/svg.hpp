#pragma once

// Minimal SVG figures: survival step plots and box charts.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace ltrcf::svg {

struct step_series {
  std::string name;
  std::vector<double> times;   // jump times, ascending
  std::vector<double> values;  // value from times[i] on
  double initial = 1.0;
};

struct box_group {
  std::string label;
  std::vector<double> values;
};

namespace detail {

inline constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
inline constexpr double width = 640, height = 420, left = 60, right = 20, top = 40, bottom = 50;

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct frame {
  double x0, x1, y0, y1;
  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline void header(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
}

inline void axes(std::ostringstream& os, const frame& f, const std::string& xlabel, const std::string& ylabel) {
  os << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
     << height - bottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    os << "<text x=\"" << f.px(xv) << "\" y=\"" << height - bottom + 16 << "\" text-anchor=\"middle\">" << num(xv)
       << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">" << num(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
     << escape(xlabel) << "</text>\n";
  os << "<text transform=\"translate(16," << (top + height - bottom) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";
}

}  // namespace detail

/// Right-continuous step curves on [0, horizon]; y axis fixed to [0, 1].
inline std::string step_plot(std::span<const step_series> series, double horizon, const std::string& title,
                             const std::string& xlabel = "time", const std::string& ylabel = "survival") {
  using namespace detail;
  if (!(horizon > 0)) {
    horizon = 1.0;
    for (const auto& s : series) {
      if (!s.times.empty()) horizon = std::max(horizon, s.times.back());
    }
  }
  const double start = series.empty() || series.front().times.empty() ? 0.0 : std::min(0.0, series.front().times.front());
  const frame f{start, horizon, 0.0, 1.0};
  std::ostringstream os;
  header(os, title);
  axes(os, f, xlabel, ylabel);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = palette[k % std::size(palette)];
    std::ostringstream path;
    double y = s.initial;
    path << "M" << f.px(f.x0) << "," << f.py(y);
    for (std::size_t i = 0; i < s.times.size() && s.times[i] <= horizon; ++i) {
      path << " H" << f.px(std::max(s.times[i], f.x0)) << " V" << f.py(s.values[i]);
      y = s.values[i];
    }
    path << " H" << f.px(horizon);
    os << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\"/>\n";
    const double ly = top + 14 + 16 * static_cast<double>(k);
    os << "<line x1=\"" << width - right - 150 << "\" y1=\"" << ly - 4 << "\" x2=\"" << width - right - 130
       << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << width - right - 125 << "\" y=\"" << ly << "\">" << escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Tukey box chart: quartile box, median line, whiskers to 1.5 IQR, outlier dots.
inline std::string box_chart(std::span<const box_group> groups, const std::string& title,
                             const std::string& xlabel, const std::string& ylabel) {
  using namespace detail;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& g : groups) {
    for (double v : g.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const double pad = 0.05 * (hi - lo);
  const frame f{0.0, static_cast<double>(groups.size()), lo - pad, hi + pad};
  std::ostringstream os;
  header(os, title);
  os << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
     << height - bottom << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">" << num(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
     << escape(xlabel) << "</text>\n"
     << "<text transform=\"translate(16," << (top + height - bottom) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(ylabel) << "</text>\n";

  const auto quantile = [](const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    return i + 1 < v.size() ? v[i] + frac * (v[i + 1] - v[i]) : v[i];
  };
  const double half = 0.3;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double cx = static_cast<double>(g) + 0.5;
    os << "<text x=\"" << f.px(cx) << "\" y=\"" << height - bottom + 16 << "\" text-anchor=\"middle\">"
       << escape(groups[g].label) << "</text>\n";
    if (groups[g].values.empty()) continue;
    auto v = groups[g].values;
    std::sort(v.begin(), v.end());
    const double q1 = quantile(v, 0.25), med = quantile(v, 0.5), q3 = quantile(v, 0.75);
    const double iqr = q3 - q1;
    double wlo = q3, whi = q1;
    for (double x : v) {
      if (x >= q1 - 1.5 * iqr) wlo = std::min(wlo, x);
      if (x <= q3 + 1.5 * iqr) whi = std::max(whi, x);
    }
    os << "<line x1=\"" << f.px(cx) << "\" y1=\"" << f.py(wlo) << "\" x2=\"" << f.px(cx) << "\" y2=\"" << f.py(whi)
       << "\" stroke=\"black\"/>\n";
    os << "<rect x=\"" << f.px(cx - half) << "\" y=\"" << f.py(q3) << "\" width=\"" << f.px(cx + half) - f.px(cx - half)
       << "\" height=\"" << std::max(0.5, f.py(q1) - f.py(q3)) << "\" fill=\"#cfe2f3\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << f.px(cx - half) << "\" y1=\"" << f.py(med) << "\" x2=\"" << f.px(cx + half) << "\" y2=\""
       << f.py(med) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (double x : v) {
      if (x < wlo || x > whi) {
        os << "<circle cx=\"" << f.px(cx) << "\" cy=\"" << f.py(x) << "\" r=\"2.5\" fill=\"none\" stroke=\"black\"/>\n";
      }
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ltrcf::svg
