// Copyright 2026 The isosim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Deterministic SVG line plots of the response and quantizer tables.

#ifndef ISOSIM_PLOT_HPP
#define ISOSIM_PLOT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "isosim/io.hpp"

namespace isosim {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

struct Panel {
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

inline constexpr const char* kBlue = "#0072BD";
inline constexpr const char* kOrange = "#D95319";
inline constexpr const char* kYellow = "#EDB120";
inline constexpr const char* kPurple = "#7E2F8E";
inline constexpr const char* kGreen = "#77AC30";

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

/// About five round tick values covering [lo, hi].
inline std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  return out;
}

inline void panel_svg(std::string& s, const Panel& p, double ox, double oy, double w, double h) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& se : p.series)
    for (std::size_t i = 0; i < se.x.size(); ++i) {
      if (!std::isfinite(se.x[i]) || !std::isfinite(se.y[i])) continue;
      xmin = std::min(xmin, se.x[i]);
      xmax = std::max(xmax, se.x[i]);
      ymin = std::min(ymin, se.y[i]);
      ymax = std::max(ymax, se.y[i]);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double x) { return ox + (x - xmin) / (xmax - xmin) * w; };
  auto py = [&](double y) { return oy + h - (y - ymin) / (ymax - ymin) * h; };

  s += "<rect x=\"" + fmt("%.2f", ox) + "\" y=\"" + fmt("%.2f", oy) + "\" width=\"" + fmt("%.2f", w) +
       "\" height=\"" + fmt("%.2f", h) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(xmin, xmax)) {
    s += "<line x1=\"" + fmt("%.2f", px(t)) + "\" y1=\"" + fmt("%.2f", oy + h) + "\" x2=\"" + fmt("%.2f", px(t)) +
         "\" y2=\"" + fmt("%.2f", oy + h - 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt("%.2f", px(t)) + "\" y=\"" + fmt("%.2f", oy + h + 16) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + fmt("%g", t) + "</text>\n";
  }
  for (double t : ticks(ymin, ymax)) {
    s += "<line x1=\"" + fmt("%.2f", ox) + "\" y1=\"" + fmt("%.2f", py(t)) + "\" x2=\"" + fmt("%.2f", ox + 5) +
         "\" y2=\"" + fmt("%.2f", py(t)) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt("%.2f", ox - 6) + "\" y=\"" + fmt("%.2f", py(t) + 4) +
         "\" text-anchor=\"end\" font-size=\"11\">" + fmt("%g", t) + "</text>\n";
  }
  s += "<text x=\"" + fmt("%.2f", ox + w / 2) + "\" y=\"" + fmt("%.2f", oy + h + 34) +
       "\" text-anchor=\"middle\" font-size=\"13\">" + escape(p.x_label) + "</text>\n";
  s += "<text transform=\"translate(" + fmt("%.2f", ox - 46) + "," + fmt("%.2f", oy + h / 2) +
       ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">" + escape(p.y_label) + "</text>\n";

  double ly = oy + 14;
  for (const auto& se : p.series) {
    std::string pts;
    auto flush = [&] {
      if (!pts.empty())
        s += "<polyline fill=\"none\" stroke=\"" + se.color + "\" stroke-width=\"1.8\" points=\"" + pts + "\"/>\n";
      pts.clear();
    };
    for (std::size_t i = 0; i < se.x.size(); ++i) {
      if (!std::isfinite(se.x[i]) || !std::isfinite(se.y[i])) {
        flush();
        continue;
      }
      if (!pts.empty()) pts += ' ';
      pts += fmt("%.2f", px(se.x[i])) + "," + fmt("%.2f", py(se.y[i]));
    }
    flush();
    s += "<line x1=\"" + fmt("%.2f", ox + w - 130) + "\" y1=\"" + fmt("%.2f", ly - 4) + "\" x2=\"" +
         fmt("%.2f", ox + w - 110) + "\" y2=\"" + fmt("%.2f", ly - 4) + "\" stroke=\"" + se.color +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fmt("%.2f", ox + w - 105) + "\" y=\"" + fmt("%.2f", ly) + "\" font-size=\"11\">" +
         escape(se.label) + "</text>\n";
    ly += 15;
  }
}

}  // namespace detail

inline std::string render_svg(const std::vector<Panel>& panels, const std::string& title) {
  const double w = 560, h = 260, left = 80, top = 40, gap = 70;
  const double height = top + panels.size() * (h + gap);
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt("%.0f", left + w + 30) + "\" height=\"" +
       detail::fmt("%.0f", height) + "\" font-family=\"sans-serif\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + detail::fmt("%.2f", left + w / 2) +
       "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + detail::escape(title) + "</text>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) detail::panel_svg(s, panels[i], left, top + i * (h + gap), w, h);
  s += "</svg>\n";
  return s;
}

namespace detail {

/// Rows grouped by the delta column (a single group when it is absent or NaN).
inline std::map<double, std::vector<std::size_t>> group_by_delta(const CsvTable& t) {
  std::map<double, std::vector<std::size_t>> g;
  const int c = t.column("delta");
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    double d = c >= 0 ? t.rows[i][c] : NAN;
    if (std::isnan(d)) d = -1.0;
    g[d].push_back(i);
  }
  return g;
}

inline std::vector<double> pick(const std::vector<double>& v, const std::vector<std::size_t>& idx, double scale = 1.0) {
  std::vector<double> out;
  for (auto i : idx) out.push_back(v[i] * scale);
  return out;
}

inline std::vector<Panel> response_panels(const CsvTable& t, const std::string& xcol, const std::string& xlabel,
                                          double xscale) {
  t.require({xcol, "t21_mag", "t12_mag", "efficiency", "isolation_db"});
  const auto x = t.values(xcol), iso = t.values("isolation_db");
  const auto t21 = t.values("t21_mag"), t12 = t.values("t12_mag"), eps = t.values("efficiency");
  const auto groups = group_by_delta(t);
  static const char* palette[] = {kBlue, kOrange, kYellow, kPurple, kGreen};
  Panel top{xlabel, "isolation (dB)", {}};
  int gi = 0;
  for (const auto& [d, idx] : groups)
    top.series.push_back({d < 0 ? "isolation" : "delta = " + fmt("%g", d), palette[gi++ % 5], pick(x, idx, xscale),
                          pick(iso, idx)});
  Panel bottom{xlabel, "magnitude", {}};
  const auto& idx = groups.begin()->second;
  bottom.series.push_back({"|t21|", kBlue, pick(x, idx, xscale), pick(t21, idx)});
  bottom.series.push_back({"|t12|", kOrange, pick(x, idx, xscale), pick(t12, idx)});
  bottom.series.push_back({"efficiency", kYellow, pick(x, idx, xscale), pick(eps, idx)});
  return {top, bottom};
}

}  // namespace detail

/// kind: isolation_vs_power, spectra_vs_freq or eigen_branches.
inline std::string plot_csv(const CsvTable& t, const std::string& kind) {
  if (kind == "isolation_vs_power")
    return render_svg(detail::response_panels(t, "pin_dbm", "input power (dBm)", 1.0), "Isolation vs power");
  if (kind == "spectra_vs_freq")
    return render_svg(detail::response_panels(t, "f0_hz", "frequency (GHz)", 1e-9), "Transmission vs frequency");
  if (kind == "eigen_branches") {
    t.require({"lj_h", "f01_hz", "f02_hz"});
    std::vector<std::size_t> idx(t.rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const auto lj = detail::pick(t.values("lj_h"), idx, 1e9);
    Panel p{"L_J (nH)", "transition frequency (GHz)", {}};
    p.series.push_back({"f01", kBlue, lj, detail::pick(t.values("f01_hz"), idx, 1e-9)});
    p.series.push_back({"f02", kOrange, lj, detail::pick(t.values("f02_hz"), idx, 1e-9)});
    return render_svg({p}, "Transition frequencies vs L_J");
  }
  throw Error(ErrorCode::ConfigError, kind, "unknown plot kind");
}

}  // namespace isosim

#endif  // ISOSIM_PLOT_HPP
