#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace sgdlab::cli {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return !(lo <= hi); }
};

}  // namespace

std::string render_svg(std::span<const RiskCurve* const> curves, const SvgOptions& options) {
  Range xr, yr;
  for (const RiskCurve* c : curves) {
    for (std::size_t i = 0; i < c->size(); ++i) {
      if (c->values[i] > 0.0 && std::isfinite(c->values[i])) {
        xr.add(std::log10(static_cast<double>(c->checkpoints[i])));
        yr.add(std::log10(c->values[i]));
      }
    }
  }
  if (xr.empty()) xr = {0.0, 1.0};
  if (yr.empty()) yr = {0.0, 1.0};
  xr.lo = std::floor(xr.lo);
  xr.hi = std::max(std::ceil(xr.hi), xr.lo + 1.0);
  yr.lo = std::floor(yr.lo);
  yr.hi = std::max(std::ceil(yr.hi), yr.lo + 1.0);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double lx) { return kLeft + (lx - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double ly) { return kTop + (yr.hi - ly) / (yr.hi - yr.lo) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
       num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" fill=\"white\"/>\n";
  if (!options.title.empty()) {
    s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" " +
         "font-family=\"sans-serif\" font-size=\"15\">" + escape(options.title) + "</text>\n";
  }
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
       "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  // Decade ticks; when the y range is wide every other label is dropped.
  const int ystep = (yr.hi - yr.lo) > 12 ? 2 : 1;
  for (int e = static_cast<int>(xr.lo); e <= static_cast<int>(xr.hi); ++e) {
    const double x = px(e);
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(x) +
         "\" y2=\"" + num(kTop + ph + 6) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(x) + "\" y=\"" + num(kTop + ph + 22) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1e" +
         std::to_string(e) + "</text>\n";
  }
  for (int e = static_cast<int>(yr.lo); e <= static_cast<int>(yr.hi); ++e) {
    const double y = py(e);
    s += "<line x1=\"" + num(kLeft - 6) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft) +
         "\" y2=\"" + num(y) + "\" stroke=\"black\"/>\n";
    if ((e - static_cast<int>(yr.lo)) % ystep == 0) {
      s += "<text x=\"" + num(kLeft - 10) + "\" y=\"" + num(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" +
           std::to_string(e) + "</text>\n";
    }
  }
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 16) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">t</text>\n";
  s += "<text x=\"18\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" " +
       "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 " +
       num(kTop + ph / 2) + ")\">risk</text>\n";

  if (options.marker_t && *options.marker_t > 0.0) {
    const double lx = std::log10(*options.marker_t);
    if (lx >= xr.lo && lx <= xr.hi) {
      const double x = px(lx);
      s += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(x) + "\" y2=\"" +
           num(kTop + ph) + "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
      s += "<text x=\"" + num(x + 4) + "\" y=\"" + num(kTop + 14) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(options.marker_label) +
           "</text>\n";
    }
  }

  std::size_t k = 0;
  for (const RiskCurve* c : curves) {
    const char* color = kPalette[k % std::size(kPalette)];
    const std::string name(series_name(c->series));
    const bool dashed = c->series == Series::kReference || c->series == Series::kBoundThm1 ||
                        c->series == Series::kBoundThm2 || c->series == Series::kBoundThm3;
    s += "<polyline data-series=\"" + name + "\" fill=\"none\" stroke=\"" + color +
         "\" stroke-width=\"1.8\"" + (dashed ? " stroke-dasharray=\"8,4\"" : "") +
         " points=\"";
    bool first = true;
    for (std::size_t i = 0; i < c->size(); ++i) {
      if (!(c->values[i] > 0.0) || !std::isfinite(c->values[i])) continue;
      if (!first) s += ' ';
      first = false;
      s += num(px(std::log10(static_cast<double>(c->checkpoints[i])))) + "," +
           num(py(std::log10(c->values[i])));
    }
    s += "\"/>\n";
    const double ly = kTop + 16 + 20.0 * static_cast<double>(k);
    const double lx = kLeft + pw + 14;
    s += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 26) +
         "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"1.8\"/>\n";
    s += "<text x=\"" + num(lx + 32) + "\" y=\"" + num(ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(name) + "</text>\n";
    ++k;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace sgdlab::cli
