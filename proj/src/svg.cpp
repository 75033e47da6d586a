#include "photoiso/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "photoiso/errors.hpp"

namespace photoiso {

namespace {

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(v);
  return t;
}

std::string panel(const Plot& p, double ox, double oy, double w, double h) {
  const double ml = 70, mr = 20, mt = 30, mb = 50;
  const double pw = w - ml - mr, ph = h - mt - mb;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  auto tx = [&](double x) { return p.logx ? std::log10(x) : x; };
  auto ty = [&](double y) { return p.logy ? std::log10(y) : y; };
  auto ok = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!p.logx || x > 0) && (!p.logy || y > 0);
  };
  for (const auto& s : p.series)
    for (size_t i = 0; i < s.x.size(); ++i)
      if (ok(s.x[i], s.y[i])) {
        xmin = std::min(xmin, tx(s.x[i]));
        xmax = std::max(xmax, tx(s.x[i]));
        ymin = std::min(ymin, ty(s.y[i]));
        ymax = std::max(ymax, ty(s.y[i]));
      }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  if (!p.logy) {
    const double pad = 0.04 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }
  auto X = [&](double x) { return ox + ml + (tx(x) - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double y) { return oy + mt + ph - (ty(y) - ymin) / (ymax - ymin) * ph; };

  std::string o;
  o += fmt::format(R"(<rect x="{:.1f}" y="{:.1f}" width="{:.1f}" height="{:.1f}" fill="none" stroke="#000"/>)",
                   ox + ml, oy + mt, pw, ph);
  o += "\n";
  auto ticks = [&](double lo, double hi, bool log) {
    std::vector<double> t;
    if (log) {
      const int step = std::max(1, int(std::ceil((hi - lo) / 8.0)));
      for (int e = int(std::ceil(lo)); e <= int(std::floor(hi)); e += step) t.push_back(e);
    } else {
      t = linear_ticks(lo, hi);
    }
    return t;
  };
  for (double v : ticks(xmin, xmax, p.logx)) {
    const double xx = ox + ml + (v - xmin) / (xmax - xmin) * pw;
    const std::string lab = p.logx ? fmt::format("1e{}", int(v)) : fmt::format("{:g}", v);
    o += fmt::format(R"(<line x1="{0:.1f}" y1="{1:.1f}" x2="{0:.1f}" y2="{2:.1f}" stroke="#000"/>)", xx,
                     oy + mt + ph, oy + mt + ph + 5);
    o += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="11" text-anchor="middle">{}</text>)", xx,
                     oy + mt + ph + 18, lab);
    o += "\n";
  }
  for (double v : ticks(ymin, ymax, p.logy)) {
    const double yy = oy + mt + ph - (v - ymin) / (ymax - ymin) * ph;
    const std::string lab = p.logy ? fmt::format("1e{}", int(v)) : fmt::format("{:g}", v);
    o += fmt::format(R"(<line x1="{0:.1f}" y1="{1:.1f}" x2="{2:.1f}" y2="{1:.1f}" stroke="#000"/>)",
                     ox + ml - 5, yy, ox + ml);
    o += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="11" text-anchor="end">{}</text>)", ox + ml - 8,
                     yy + 4, lab);
    o += "\n";
  }
  o += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="13" text-anchor="middle">{}</text>)",
                   ox + ml + pw / 2, oy + 18, esc(p.title));
  o += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="12" text-anchor="middle">{}</text>)",
                   ox + ml + pw / 2, oy + h - 10, esc(p.xlabel));
  o += fmt::format(
      R"x(<text x="{0:.1f}" y="{1:.1f}" font-size="12" text-anchor="middle" transform="rotate(-90 {0:.1f} {1:.1f})">{2}</text>)x",
      ox + 16, oy + mt + ph / 2, esc(p.ylabel));
  o += "\n";

  for (size_t k = 0; k < p.series.size(); ++k) {
    const auto& s = p.series[k];
    std::string pts;
    for (size_t i = 0; i < s.x.size(); ++i)
      if (ok(s.x[i], s.y[i])) pts += fmt::format("{:.2f},{:.2f} ", X(s.x[i]), Y(s.y[i]));
    const char* col = kColors[k % std::size(kColors)];
    o += fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="1.5"{} points="{}"/>)", col,
                     s.dash.empty() ? "" : fmt::format(R"( stroke-dasharray="{}")", s.dash), pts);
    o += "\n";
    const double ly = oy + mt + 14 + 16 * k;
    o += fmt::format(R"(<line x1="{:.1f}" y1="{:.1f}" x2="{:.1f}" y2="{:.1f}" stroke="{}" stroke-width="2"/>)",
                     ox + ml + 10, ly, ox + ml + 35, ly, col);
    o += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="11">{}</text>)", ox + ml + 40, ly + 4,
                     esc(s.label));
    o += "\n";
  }
  return o;
}

}  // namespace

std::string render_svg(const std::vector<Plot>& panels, int pw, int ph) {
  const int n = static_cast<int>(panels.size());
  const int W = pw * std::max(1, n);
  std::string o = fmt::format(
      R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif">)",
      W, ph, W, ph);
  o += "\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (int i = 0; i < n; ++i) o += panel(panels[i], i * pw, 0, pw, ph);
  o += "</svg>\n";
  return o;
}

void write_svg(const std::string& path, const std::vector<Plot>& panels) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << render_svg(panels);
}

}  // namespace photoiso
