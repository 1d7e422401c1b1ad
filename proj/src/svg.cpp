// SPDX-License-Identifier: Apache-2.0
#include "lipcap/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "lipcap/error.hpp"

namespace lipcap {

std::string to_string(Panel p) {
  switch (p) {
    case Panel::Norms: return "norms";
    case Panel::Pw: return "pw";
    case Panel::Variance: return "variance";
    case Panel::Reduction: return "reduction";
  }
  return "norms";
}

Panel parse_panel(const std::string& name) {
  for (Panel p : {Panel::Norms, Panel::Pw, Panel::Variance, Panel::Reduction}) {
    if (to_string(p) == name) return p;
  }
  throw ArgumentError("unknown panel '" + name + "' (expected norms|pw|variance|reduction)");
}

namespace {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> pts;  // (step, value)
};

std::string fx(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string fy(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::vector<Series> panel_series(const TrainTrace& t, Panel p) {
  std::map<std::size_t, Series> per_layer;
  Series single;
  std::map<std::size_t, bool> seen_step;
  for (const auto& r : t.rows) {
    const double s = static_cast<double>(r.step);
    switch (p) {
      case Panel::Norms:
      case Panel::Variance: {
        auto& ser = per_layer[r.layer];
        ser.label = "layer " + std::to_string(r.layer);
        ser.pts.emplace_back(s, p == Panel::Norms ? r.w_norm : r.var_mean);
        break;
      }
      case Panel::Pw:
      case Panel::Reduction:
        if (seen_step[r.step]) break;
        seen_step[r.step] = true;
        single.label = p == Panel::Pw ? "P_w" : "prod 1/sigma";
        single.pts.emplace_back(s, p == Panel::Pw ? r.pw_product : r.inv_sigma_product);
        break;
    }
  }
  std::vector<Series> out;
  if (p == Panel::Pw || p == Panel::Reduction) {
    out.push_back(std::move(single));
  } else {
    for (auto& [k, v] : per_layer) out.push_back(std::move(v));
  }
  return out;
}

const char* panel_title(Panel p) {
  switch (p) {
    case Panel::Norms: return "weight norm per layer";
    case Panel::Pw: return "product of weight norms";
    case Panel::Variance: return "pre-normalization variance (mean over units)";
    case Panel::Reduction: return "normalizer factor product";
  }
  return "";
}

}  // namespace

std::string emit_svg_plot(const TrainTrace& trace, const PlotOptions& opts) {
  if (trace.rows.empty()) throw ConfigError("plot: trace has no data rows");
  if (opts.panels.empty()) throw ArgumentError("plot: no panels selected");
  const double W = opts.width, H = opts.panel_height;
  const double ml = 70, mr = 110, mt = 28, mb = 30;
  const double total_h = H * static_cast<double>(opts.panels.size());

  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fx(W) + "\" height=\"" + fx(total_h) +
       "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t pi = 0; pi < opts.panels.size(); ++pi) {
    const Panel p = opts.panels[pi];
    auto series = panel_series(trace, p);
    auto ty = [&](double v) {
      if (!opts.log_scale) return v;
      if (!(v > 0.0)) throw ConfigError("plot: log scale needs positive values in panel " + to_string(p));
      return std::log10(v);
    };
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& ser : series) {
      for (const auto& [x, y] : ser.pts) {
        if (!std::isfinite(y)) throw ConfigError("plot: non-finite value in panel " + to_string(p));
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, ty(y));
        ymax = std::max(ymax, ty(y));
      }
    }
    // Flat ranges get symmetric padding so the line sits mid-panel.
    if (xmax == xmin) {
      xmin -= 0.5;
      xmax += 0.5;
    }
    if (ymax == ymin) {
      const double pad = std::max(1e-12, 0.5 * std::abs(ymin));
      ymin -= pad;
      ymax += pad;
    }
    const double top = H * static_cast<double>(pi);
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    s += "<g id=\"panel-" + to_string(p) + "\">\n";
    s += "<text x=\"" + fx(ml) + "\" y=\"" + fx(top + 16) + "\" font-size=\"13\">" + panel_title(p) +
         (opts.log_scale ? " (log10)" : "") + "</text>\n";
    s += "<rect x=\"" + fx(ml) + "\" y=\"" + fx(top + mt) + "\" width=\"" + fx(pw) + "\" height=\"" + fx(ph) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double yv = ymin + (ymax - ymin) * k / 4.0;
      const double label = opts.log_scale ? std::pow(10.0, yv) : yv;
      s += "<text x=\"" + fx(ml - 6) + "\" y=\"" + fx(py(yv) + 4) + "\" text-anchor=\"end\">" + fy(label) + "</text>\n";
    }
    s += "<text x=\"" + fx(ml) + "\" y=\"" + fx(top + H - 10) + "\">step " + fy(xmin) + "</text>\n";
    s += "<text x=\"" + fx(ml + pw) + "\" y=\"" + fx(top + H - 10) + "\" text-anchor=\"end\">step " + fy(xmax) +
         "</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
      const char* color = kColors[si % (sizeof kColors / sizeof *kColors)];
      s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < series[si].pts.size(); ++k) {
        const auto& [x, y] = series[si].pts[k];
        s += (k ? " " : "") + fx(px(x)) + "," + fx(py(ty(y)));
      }
      s += "\"/>\n";
      s += "<text x=\"" + fx(ml + pw + 8) + "\" y=\"" + fx(top + mt + 12 + 14 * static_cast<double>(si)) +
           "\" fill=\"" + color + "\">" + series[si].label + "</text>\n";
    }
    s += "</g>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace lipcap
