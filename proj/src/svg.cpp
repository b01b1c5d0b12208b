#include "bct/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace bct {

namespace {

struct Range {
  double lo = 0;
  double hi = 1;
  double span() const { return hi - lo; }
};

Range padded(double lo, double hi) {
  if (!(lo < hi)) {
    lo -= 1;
    hi += 1;
  }
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

double nice_step(double span, int target_ticks) {
  const double raw = span / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  if (norm <= 1) return mag;
  if (norm <= 2) return 2 * mag;
  if (norm <= 5) return 5 * mag;
  return 10 * mag;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::string render_line_chart(const SvgChartSpec& spec,
                              const std::vector<SvgSeries>& series) {
  const double ml = 82, mr = 24, mt = 40, mb = 56;  // plot margins
  const double pw = spec.width - ml - mr;
  const double ph = spec.height - mt - mb;

  double xlo = HUGE_VAL, xhi = -HUGE_VAL, ylo = HUGE_VAL, yhi = -HUGE_VAL;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  if (spec.hline) {
    ylo = std::min(ylo, *spec.hline);
    yhi = std::max(yhi, *spec.hline);
  }
  if (!std::isfinite(xlo)) {
    xlo = 0;
    xhi = 1;
  }
  if (!std::isfinite(ylo)) {
    ylo = 0;
    yhi = 1;
  }
  const Range xr = padded(xlo, xhi);
  const Range yr = padded(ylo, yhi);
  auto px = [&](double x) { return ml + (x - xr.lo) / xr.span() * pw; };
  auto py = [&](double y) { return mt + ph - (y - yr.lo) / yr.span() * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
      << "\" height=\"" << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << spec.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << spec.title << "</text>\n";

  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";

  const double xstep = nice_step(xr.span(), 6);
  for (double x = std::ceil(xr.lo / xstep) * xstep; x <= xr.hi + 1e-9 * xstep; x += xstep) {
    out << "<line x1=\"" << px(x) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(x) << "\" y2=\""
        << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(x) << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">"
        << fmt(x) << "</text>\n";
  }
  const double ystep = nice_step(yr.span(), 6);
  for (double y = std::ceil(yr.lo / ystep) * ystep; y <= yr.hi + 1e-9 * ystep; y += ystep) {
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(y) << "\" x2=\"" << ml << "\" y2=\""
        << py(y) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">"
        << fmt(y) << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << spec.height - 12
      << "\" text-anchor=\"middle\">" << spec.x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << mt + ph / 2 << ")\">" << spec.y_label << "</text>\n";

  if (spec.hline) {
    out << "<line x1=\"" << ml << "\" y1=\"" << py(*spec.hline) << "\" x2=\"" << ml + pw
        << "\" y2=\"" << py(*spec.hline)
        << "\" stroke=\"#555555\" stroke-dasharray=\"6,4\"/>\n";
    if (!spec.hline_label.empty()) {
      out << "<text x=\"" << ml + 6 << "\" y=\"" << py(*spec.hline) - 5 << "\" fill=\"#555555\">"
          << spec.hline_label << "</text>\n";
    }
  }

  for (const auto& s : series) {
    if (s.points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.4\" points=\"";
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      out << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
    }
    out << "\"/>\n";
  }

  // legend: one entry per distinct label, in first-seen order
  double ly = mt + 10;
  std::vector<std::string> seen;
  for (const auto& s : series) {
    if (s.label.empty()) continue;
    if (std::find(seen.begin(), seen.end(), s.label) != seen.end()) continue;
    seen.push_back(s.label);
    out << "<line x1=\"" << ml + pw - 150 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw - 126
        << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << ml + pw - 120 << "\" y=\"" << ly + 4 << "\">" << s.label
        << "</text>\n";
    ly += 18;
  }

  out << "</svg>\n";
  return out.str();
}

}  // namespace bct
