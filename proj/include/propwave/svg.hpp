#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "propwave/errors.hpp"

namespace propwave {

// Minimal static line plot writer; polylines, linear or log axes, no
// external dependencies and no embedded timestamps.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)),
        xlabel_(std::move(xlabel)),
        ylabel_(std::move(ylabel)) {}

  void log_x(bool v) { logx_ = v; }
  void log_y(bool v) { logy_ = v; }

  void add(std::vector<double> x, std::vector<double> y, std::string label) {
    series_.push_back({std::move(x), std::move(y), std::move(label)});
  }

  void write(const std::string& path) const {
    const double W = 820, H = 540;
    const double ml = 70, mr = 20, mt = 40, mb = 55;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series_) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double xv = tx(s.x[i]), yv = ty(s.y[i]);
        if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
        xmin = std::min(xmin, xv);
        xmax = std::max(xmax, xv);
        ymin = std::min(ymin, yv);
        ymax = std::max(ymax, yv);
      }
    }
    if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
    if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double v) { return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open SVG output " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title_
        << "</text>\n";

    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
        << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
        << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
      const double fx = xmin + (xmax - xmin) * k / 5.0;
      const double fy = ymin + (ymax - ymin) * k / 5.0;
      out << "<line x1=\"" << px(fx) << "\" y1=\"" << H - mb << "\" x2=\""
          << px(fx) << "\" y2=\"" << H - mb + 5 << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << px(fx) << "\" y=\"" << H - mb + 20
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"11\">"
          << tick_label(fx, logx_) << "</text>\n";
      out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(fy) << "\" x2=\""
          << ml << "\" y2=\"" << py(fy) << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"11\">"
          << tick_label(fy, logy_) << "</text>\n";
    }
    out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\">"
        << xlabel_ << "</text>\n";
    out << "<text x=\"18\" y=\"" << (mt + H - mb) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\" transform=\"rotate(-90 18 "
        << (mt + H - mb) / 2 << ")\">" << ylabel_ << "</text>\n";

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b",
                                    "#17becf", "#7f7f7f"};
    for (std::size_t si = 0; si < series_.size(); ++si) {
      const auto& s = series_[si];
      out << "<polyline fill=\"none\" stroke=\"" << palette[si % 8]
          << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double xv = tx(s.x[i]), yv = ty(s.y[i]);
        if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
        out << px(xv) << ',' << py(yv) << ' ';
      }
      out << "\"/>\n";
      // legend
      const double lx = W - mr - 180, ly = mt + 18.0 * si + 8;
      out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24
          << "\" y2=\"" << ly << "\" stroke=\"" << palette[si % 8]
          << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
          << "</text>\n";
    }
    out << "</svg>\n";
  }

 private:
  struct Series {
    std::vector<double> x, y;
    std::string label;
  };

  double tx(double v) const { return logx_ ? safe_log10(v) : v; }
  double ty(double v) const { return logy_ ? safe_log10(v) : v; }
  static double safe_log10(double v) {
    return v > 0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN();
  }
  static std::string tick_label(double v, bool is_log) {
    char buf[32];
    if (is_log) {
      std::snprintf(buf, sizeof buf, "1e%.1f", v);
    } else {
      std::snprintf(buf, sizeof buf, "%.4g", v);
    }
    return buf;
  }

  std::string title_, xlabel_, ylabel_;
  bool logx_ = false, logy_ = false;
  std::vector<Series> series_;
};

}  // namespace propwave
