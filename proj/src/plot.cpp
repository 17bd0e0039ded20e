#include "lpvmpc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "lpvmpc/io.hpp"

namespace lpvmpc::plot {

namespace {

struct Range {
  double lo = 0.0;
  double hi = 1.0;
  double span() const { return hi - lo; }
};

Range pad(Range r) {
  if (!(r.hi > r.lo)) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  const double margin = 0.05 * r.span();
  return {r.lo - margin, r.hi + margin};
}

// 1-2-5 tick spacing with about `target` ticks over the range.
std::vector<double> ticks(const Range& r, int target = 6) {
  const double raw = r.span() / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * mult >= raw) {
      step = mag * mult;
      break;
    }
  }
  std::vector<double> out;
  for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-12 * step; v += step) {
    out.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
  }
  return out;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string Figure::render() const {
  constexpr double ml = 70.0;
  constexpr double mr = 20.0;
  constexpr double mt = 40.0;
  constexpr double mb = 55.0;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;

  Range xr{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  Range yr = xr;
  for (const Series& s : series) {
    for (double v : s.x) {
      xr.lo = std::min(xr.lo, v);
      xr.hi = std::max(xr.hi, v);
    }
    for (double v : s.y) {
      yr.lo = std::min(yr.lo, v);
      yr.hi = std::max(yr.hi, v);
    }
  }
  if (!std::isfinite(xr.lo) || !std::isfinite(yr.lo)) {
    xr = {0.0, 1.0};
    yr = {0.0, 1.0};
  }
  xr = pad(xr);
  yr = pad(yr);
  if (equal_aspect) {
    const double sx = xr.span() / pw;
    const double sy = yr.span() / ph;
    const double s = std::max(sx, sy);
    const double cx = 0.5 * (xr.lo + xr.hi);
    const double cy = 0.5 * (yr.lo + yr.hi);
    xr = {cx - 0.5 * s * pw, cx + 0.5 * s * pw};
    yr = {cy - 0.5 * s * ph, cy + 0.5 * s * ph};
  }

  auto px = [&](double x) { return ml + (x - xr.lo) / xr.span() * pw; };
  auto py = [&](double y) { return mt + ph - (y - yr.lo) / yr.span() * ph; };

  std::string svg;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n"
                "<rect width=\"%d\" height=\"%d\" fill=\"white\"/>\n",
                width, height, width, height, width, height);
  svg += buf;

  for (double t : ticks(xr)) {
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\"/>\n"
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\" "
                  "fill=\"#333333\">%s</text>\n",
                  px(t), mt, px(t), mt + ph, px(t), mt + ph + 18.0, fmt(t).c_str());
    svg += buf;
  }
  for (double t : ticks(yr)) {
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\"/>\n"
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"end\" "
                  "fill=\"#333333\">%s</text>\n",
                  ml, py(t), ml + pw, py(t), ml - 6.0, py(t) + 4.0, fmt(t).c_str());
    svg += buf;
  }

  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" "
                "stroke=\"#333333\"/>\n",
                ml, mt, pw, ph);
  svg += buf;

  for (const Series& s : series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (n == 0) {
      continue;
    }
    std::string points;
    char pt[64];
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(pt, sizeof(pt), "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
      points += pt;
    }
    std::snprintf(buf, sizeof(buf),
                  "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"%.2f\"%s points=\"",
                  s.color.c_str(), s.width, s.dashed ? " stroke-dasharray=\"6 4\"" : "");
    svg += buf;
    svg += points;
    svg += "\"/>\n";
  }

  double ly = mt + 16.0;
  for (const Series& s : series) {
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                  "stroke-width=\"2\"%s/>\n"
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" fill=\"#333333\">%s</text>\n",
                  ml + pw - 150.0, ly, ml + pw - 120.0, ly, s.color.c_str(),
                  s.dashed ? " stroke-dasharray=\"6 4\"" : "", ml + pw - 112.0, ly + 4.0,
                  escape(s.label).c_str());
    svg += buf;
    ly += 18.0;
  }

  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"15\" text-anchor=\"middle\" "
                "fill=\"#111111\">%s</text>\n"
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\" "
                "fill=\"#111111\">%s</text>\n"
                "<text x=\"18\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\" "
                "fill=\"#111111\" transform=\"rotate(-90 18 %.2f)\">%s</text>\n"
                "</svg>\n",
                ml + pw / 2.0, mt - 14.0, escape(title).c_str(), ml + pw / 2.0,
                mt + ph + 42.0, escape(xlabel).c_str(), mt + ph / 2.0, mt + ph / 2.0,
                escape(ylabel).c_str());
  svg += buf;
  return svg;
}

void Figure::save(const std::filesystem::path& path) const {
  write_text_file(path, render());
}

}  // namespace lpvmpc::plot
