#include "svg.hpp"

#include "proxrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace proxrl::cli {

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round step of roughly range/5 to 1, 2 or 5 times a power of ten.
double nice_step(double range) {
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  return (frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0) * mag;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::add_line(std::vector<double> xs, std::vector<double> ys, std::string color, std::string label) {
  if (xs.size() != ys.size()) throw InvalidArgument("line series lengths differ");
  series_.push_back({Series::Kind::kLine, std::move(xs), std::move(ys), {}, std::move(color), std::move(label)});
}

void SvgPlot::add_band(std::vector<double> xs, std::vector<double> lo, std::vector<double> hi, std::string color) {
  if (xs.size() != lo.size() || xs.size() != hi.size()) throw InvalidArgument("band series lengths differ");
  series_.push_back({Series::Kind::kBand, std::move(xs), std::move(lo), std::move(hi), std::move(color), {}});
}

void SvgPlot::add_error_bars(std::vector<double> xs, std::vector<double> ys, std::vector<double> err,
                             std::string color) {
  if (xs.size() != ys.size() || xs.size() != err.size()) throw InvalidArgument("error-bar series lengths differ");
  series_.push_back({Series::Kind::kErrorBars, std::move(xs), std::move(ys), std::move(err), std::move(color), {}});
}

std::string SvgPlot::render(int width, int height) const {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  auto extend_y = [&](double y) {
    if (std::isfinite(y)) {
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  };
  for (const Series& s : series_) {
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      x_lo = std::min(x_lo, s.xs[i]);
      x_hi = std::max(x_hi, s.xs[i]);
      switch (s.kind) {
        case Series::Kind::kLine: extend_y(s.a[i]); break;
        case Series::Kind::kBand: extend_y(s.a[i]); extend_y(s.b[i]); break;
        case Series::Kind::kErrorBars: extend_y(s.a[i] - s.b[i]); extend_y(s.a[i] + s.b[i]); break;
      }
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0;
  if (!std::isfinite(y_lo)) y_lo = 0.0, y_hi = 1.0;
  if (x_hi - x_lo < 1e-12) x_lo -= 0.5, x_hi += 0.5;
  if (y_hi - y_lo < 1e-12) y_lo -= 0.5, y_hi += 0.5;
  // Keep tick labels distinguishable at four significant digits.
  const double min_span = 1e-2 * std::max(std::abs(y_lo), std::abs(y_hi));
  if (y_hi - y_lo < min_span) {
    const double mid = 0.5 * (y_lo + y_hi);
    y_lo = mid - 0.5 * min_span;
    y_hi = mid + 0.5 * min_span;
  }
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  const double left = 70, right = 20, top = 40, bottom = 55;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fixed(width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title_)
    << "</text>\n";

  // Axes and ticks.
  o << "<g stroke=\"#444\" fill=\"none\">\n";
  o << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(top + ph) << "\" x2=\"" << fixed(left + pw) << "\" y2=\""
    << fixed(top + ph) << "\"/>\n";
  o << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(top) << "\" x2=\"" << fixed(left) << "\" y2=\""
    << fixed(top + ph) << "\"/>\n";
  o << "</g>\n";
  const double xs = nice_step(x_hi - x_lo), ys = nice_step(y_hi - y_lo);
  for (double t = std::ceil(x_lo / xs) * xs; t <= x_hi + 1e-9 * xs; t += xs) {
    o << "<line x1=\"" << fixed(px(t)) << "\" y1=\"" << fixed(top + ph) << "\" x2=\"" << fixed(px(t)) << "\" y2=\""
      << fixed(top + ph + 5) << "\" stroke=\"#444\"/>\n";
    o << "<text x=\"" << fixed(px(t)) << "\" y=\"" << fixed(top + ph + 18) << "\" text-anchor=\"middle\">"
      << tick_label(t) << "</text>\n";
  }
  for (double t = std::ceil(y_lo / ys) * ys; t <= y_hi + 1e-9 * ys; t += ys) {
    o << "<line x1=\"" << fixed(left - 5) << "\" y1=\"" << fixed(py(t)) << "\" x2=\"" << fixed(left + pw) << "\" y2=\""
      << fixed(py(t)) << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(py(t) + 4) << "\" text-anchor=\"end\">"
      << tick_label(t) << "</text>\n";
  }
  o << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(height - 12.0) << "\" text-anchor=\"middle\">"
    << escape(x_label_) << "</text>\n";
  o << "<text transform=\"translate(16," << fixed(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(y_label_) << "</text>\n";

  int legend_row = 0;
  for (const Series& s : series_) {
    switch (s.kind) {
      case Series::Kind::kBand: {
        o << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < s.xs.size(); ++i) o << fixed(px(s.xs[i])) << ',' << fixed(py(s.b[i])) << ' ';
        for (std::size_t i = s.xs.size(); i-- > 0;) o << fixed(px(s.xs[i])) << ',' << fixed(py(s.a[i])) << ' ';
        o << "\"/>\n";
        break;
      }
      case Series::Kind::kLine: {
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.xs.size(); ++i) o << fixed(px(s.xs[i])) << ',' << fixed(py(s.a[i])) << ' ';
        o << "\"/>\n";
        if (!s.label.empty()) {
          const double ly = top + 14 + 16 * legend_row++;
          o << "<line x1=\"" << fixed(left + pw - 120) << "\" y1=\"" << fixed(ly - 4) << "\" x2=\""
            << fixed(left + pw - 100) << "\" y2=\"" << fixed(ly - 4) << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"/>\n";
          o << "<text x=\"" << fixed(left + pw - 95) << "\" y=\"" << fixed(ly) << "\">" << escape(s.label)
            << "</text>\n";
        }
        break;
      }
      case Series::Kind::kErrorBars: {
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
          const double x = px(s.xs[i]);
          o << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(py(s.a[i] - s.b[i])) << "\" x2=\"" << fixed(x)
            << "\" y2=\"" << fixed(py(s.a[i] + s.b[i])) << "\" stroke=\"" << s.color << "\"/>\n";
          o << "<circle cx=\"" << fixed(x) << "\" cy=\"" << fixed(py(s.a[i])) << "\" r=\"3\" fill=\"" << s.color
            << "\"/>\n";
        }
        break;
      }
    }
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace proxrl::cli
