#pragma once

// Minimal self-contained SVG line/scatter plots: linear or log axes, one
// colour per series, legend in the top-right corner.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace magtun::svg {

struct Series {
  std::string name;
  std::vector<double> x, y;
  bool lines = true;
};

struct Plot {
  std::string title, xlabel, ylabel;
  bool log_x = false, log_y = false;
  std::vector<Series> series;
  std::vector<double> hlines;  // dashed reference levels
  int width = 640, height = 420;
};

namespace detail {

inline std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

inline std::string num(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

struct Axis {
  double lo, hi;
  bool log;
  double map(double v, double p0, double p1) const {
    double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo)) : (v - lo) / (hi - lo);
    return p0 + t * (p1 - p0);
  }
  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (int e = int(std::floor(std::log10(lo))); e <= int(std::ceil(std::log10(hi))); ++e) {
        double v = std::pow(10.0, e);
        if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) t.push_back(v);
      }
      if (t.size() < 2) t = {lo, hi};
      return t;
    }
    double step = std::pow(10.0, std::floor(std::log10((hi - lo) / 4)));
    for (double m : {1.0, 2.0, 5.0})
      if ((hi - lo) / (m * step) <= 6) {
        step *= m;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(v);
    return t;
  }
};

inline Axis make_axis(std::vector<double> v, bool log) {
  if (log) v.erase(std::remove_if(v.begin(), v.end(), [](double a) { return !(a > 0.0); }), v.end());
  if (v.empty()) return {log ? 1.0 : 0.0, log ? 10.0 : 1.0, log};
  auto [a, b] = std::minmax_element(v.begin(), v.end());
  double lo = *a, hi = *b;
  if (log) {
    if (lo == hi) lo /= 2, hi *= 2;
    double pad = std::pow(hi / lo, 0.05);
    return {lo / pad, hi * pad, true};
  }
  if (lo == hi) lo -= 0.5 * std::max(1.0, std::abs(lo)), hi += 0.5 * std::max(1.0, std::abs(hi));
  double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad, false};
}

}  // namespace detail

inline std::string render(const Plot& p) {
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  std::vector<double> xs, ys;
  for (const auto& s : p.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series '" + s.name + "' has mismatched lengths");
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  ys.insert(ys.end(), p.hlines.begin(), p.hlines.end());
  auto ax = detail::make_axis(xs, p.log_x), ay = detail::make_axis(ys, p.log_y);
  const double l = 80, r = p.width - 20, t = 40, b = p.height - 55;
  auto ok = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!p.log_x || x > 0) && (!p.log_y || y > 0);
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << p.width << "\" height=\"" << p.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << p.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << detail::esc(p.title)
    << "</text>\n";
  o << "<rect x=\"" << l << "\" y=\"" << t << "\" width=\"" << r - l << "\" height=\"" << b - t
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double v : ax.ticks()) {
    double X = ax.map(v, l, r);
    o << "<line x1=\"" << X << "\" y1=\"" << b << "\" x2=\"" << X << "\" y2=\"" << b + 5 << "\" stroke=\"black\"/>"
      << "<text x=\"" << X << "\" y=\"" << b + 18 << "\" text-anchor=\"middle\">" << detail::num(v) << "</text>\n";
  }
  for (double v : ay.ticks()) {
    double Y = ay.map(v, b, t);
    o << "<line x1=\"" << l - 5 << "\" y1=\"" << Y << "\" x2=\"" << l << "\" y2=\"" << Y << "\" stroke=\"black\"/>"
      << "<text x=\"" << l - 8 << "\" y=\"" << Y + 4 << "\" text-anchor=\"end\">" << detail::num(v) << "</text>\n";
  }
  o << "<text x=\"" << (l + r) / 2 << "\" y=\"" << p.height - 15 << "\" text-anchor=\"middle\">"
    << detail::esc(p.xlabel) << "</text>\n";
  o << "<text transform=\"translate(18," << (t + b) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << detail::esc(p.ylabel) << "</text>\n";
  for (double v : p.hlines) {
    if (p.log_y && !(v > 0)) continue;
    double Y = ay.map(v, b, t);
    o << "<line x1=\"" << l << "\" y1=\"" << Y << "\" x2=\"" << r << "\" y2=\"" << Y
      << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (size_t k = 0; k < p.series.size(); ++k) {
    const auto& s = p.series[k];
    const char* c = colours[k % 6];
    std::ostringstream pts;
    for (size_t i = 0; i < s.x.size(); ++i)
      if (ok(s.x[i], s.y[i])) pts << ax.map(s.x[i], l, r) << ',' << ay.map(s.y[i], b, t) << ' ';
    if (s.lines)
      o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    for (size_t i = 0; i < s.x.size(); ++i)
      if (ok(s.x[i], s.y[i]))
        o << "<circle cx=\"" << ax.map(s.x[i], l, r) << "\" cy=\"" << ay.map(s.y[i], b, t) << "\" r=\"3\" fill=\"" << c
          << "\"/>\n";
    double ly = t + 16 + 16 * double(k);
    o << "<line x1=\"" << r - 130 << "\" y1=\"" << ly - 4 << "\" x2=\"" << r - 110 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << c << "\" stroke-width=\"2\"/><text x=\"" << r - 104 << "\" y=\"" << ly << "\">"
      << detail::esc(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace magtun::svg
