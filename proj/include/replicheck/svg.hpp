#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "replicheck/errors.hpp"
#include "replicheck/report.hpp"
#include "replicheck/rng.hpp"

namespace replicheck {

enum class PlotKind { strip, forest };

inline PlotKind parse_plot_kind(std::string_view s) {
  if (s == "strip") return PlotKind::strip;
  if (s == "forest") return PlotKind::forest;
  throw ConfigError("unknown plot kind '" + std::string(s) + "' (expected strip or forest)");
}

namespace svg {

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

inline std::string tick_label(double v, double step) {
  char buf[32];
  const int decimals = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step)));
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

// Tick step of 1, 2 or 5 times a power of ten giving about `target` ticks.
inline double nice_step(double span, int target = 5) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

struct LinearScale {
  double d0, d1, r0, r1;
  double operator()(double v) const { return r0 + (v - d0) / (d1 - d0) * (r1 - r0); }
};

// Expands [lo, hi] outward to whole tick steps.
inline std::pair<double, double> padded_domain(double lo, double hi, double& step) {
  if (lo == hi) {
    const double pad = lo == 0.0 ? 1.0 : std::fabs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  step = nice_step(hi - lo);
  return {std::floor(lo / step) * step, std::ceil(hi / step) * step};
}

class Document {
 public:
  Document(int width, int height) : width_(width), height_(height) {}

  void add(std::string element) { body_ += "  " + element + "\n"; }

  void text(double x, double y, std::string_view content, std::string_view anchor = "middle",
            std::string_view extra = "") {
    add("<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" +
        std::string(anchor) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) + ">" +
        escape(content) + "</text>");
  }

  void line(double x1, double y1, double x2, double y2, std::string_view cls) {
    add("<line class=\"" + std::string(cls) + "\" x1=\"" + num(x1) + "\" y1=\"" + num(y1) +
        "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) + "\"/>");
  }

  std::string str(std::string_view title) const {
    std::string out =
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
        std::to_string(width_) + "\" height=\"" + std::to_string(height_) +
        "\" viewBox=\"0 0 " + std::to_string(width_) + " " + std::to_string(height_) + "\">\n";
    out += "  <title>" + escape(title) + "</title>\n";
    out +=
        "  <style type=\"text/css\">\n"
        "    text { font-family: Helvetica, Arial, sans-serif; font-size: 12px; fill: #222; }\n"
        "    .axis { stroke: #222; stroke-width: 1; }\n"
        "    .grid { stroke: #ddd; stroke-width: 1; }\n"
        "    .zero { stroke: #888; stroke-width: 1; stroke-dasharray: 4 3; }\n"
        "    .ci { stroke: #222; stroke-width: 1.5; }\n"
        "    .mean { stroke: #222; stroke-width: 2; }\n"
        "  </style>\n";
    out += "  <rect x=\"0\" y=\"0\" width=\"" + std::to_string(width_) + "\" height=\"" +
           std::to_string(height_) + "\" fill=\"#ffffff\"/>\n";
    out += body_;
    out += "</svg>\n";
    return out;
  }

 private:
  int width_;
  int height_;
  std::string body_;
};

inline constexpr std::string_view palette[] = {"#1b6ca8", "#d1495b", "#66a182", "#edae49",
                                               "#7c5295", "#2e4057"};

inline std::string strip_plot(const AnalysisReport& report, std::uint64_t seed) {
  if (!report.data)
    throw ConfigError("a strip plot needs the raw observations (not available in summaries mode)");
  const auto& obs = report.data->observations();
  std::vector<std::string> batches, treatments;
  for (const auto& o : obs) {
    if (o.excluded) continue;
    batches.push_back(o.batch);
    treatments.push_back(o.treatment);
  }
  std::sort(batches.begin(), batches.end());
  batches.erase(std::unique(batches.begin(), batches.end()), batches.end());
  std::sort(treatments.begin(), treatments.end());
  treatments.erase(std::unique(treatments.begin(), treatments.end()), treatments.end());
  if (batches.empty()) throw ConfigError("no observations to plot");

  double lo = INFINITY, hi = -INFINITY;
  for (const auto& o : obs)
    if (!o.excluded) {
      lo = std::min(lo, o.outcome);
      hi = std::max(hi, o.outcome);
    }
  double step = 1.0;
  const auto [d0, d1] = padded_domain(lo, hi, step);

  const double left = 70, right = 20, top = 40, bottom = 60;
  const double group_w = std::max(60.0 * treatments.size(), 110.0);
  const int width = static_cast<int>(left + right + group_w * batches.size());
  const int height = 420;
  const LinearScale y{d0, d1, height - bottom, top};
  Document doc(width, height);

  doc.text(width / 2.0, 22, "Outcome by batch and treatment", "middle",
           "font-weight=\"bold\"");
  for (int k = 0; d0 + k * step <= d1 + step * 1e-9; ++k) {
    const double v = d0 + k * step;
    doc.line(left, y(v), width - right, y(v), "grid");
    doc.text(left - 6, y(v) + 4, tick_label(v, step), "end");
  }
  doc.line(left, top, left, height - bottom, "axis");
  doc.line(left, height - bottom, width - right, height - bottom, "axis");

  std::map<std::string, std::size_t> batch_index, treatment_index;
  for (std::size_t j = 0; j < batches.size(); ++j) batch_index[batches[j]] = j;
  for (std::size_t i = 0; i < treatments.size(); ++i) treatment_index[treatments[i]] = i;
  const double slot_w = group_w / treatments.size();
  auto slot_center = [&](std::size_t j, std::size_t i) {
    return left + group_w * j + slot_w * (i + 0.5);
  };

  for (std::size_t j = 0; j < batches.size(); ++j) {
    doc.text(left + group_w * (j + 0.5), height - bottom + 36, batches[j], "middle",
             "font-weight=\"bold\"");
    for (std::size_t i = 0; i < treatments.size(); ++i)
      doc.text(slot_center(j, i), height - bottom + 16, treatments[i]);
  }

  std::vector<double> sum(batches.size() * treatments.size(), 0.0);
  std::vector<int> count(sum.size(), 0);
  Rng rng(seed);
  const double jitter = slot_w * 0.3;
  for (const auto& o : obs) {
    if (o.excluded) continue;
    const auto j = batch_index[o.batch];
    const auto i = treatment_index[o.treatment];
    sum[j * treatments.size() + i] += o.outcome;
    ++count[j * treatments.size() + i];
    const double x = slot_center(j, i) + (2.0 * rng.uniform() - 1.0) * jitter;
    doc.add("<circle cx=\"" + num(x) + "\" cy=\"" + num(y(o.outcome)) + "\" r=\"2.5\" fill=\"" +
            std::string(palette[i % std::size(palette)]) + "\" fill-opacity=\"0.6\"/>");
  }
  // Cell means as short horizontal bars.
  for (std::size_t j = 0; j < batches.size(); ++j)
    for (std::size_t i = 0; i < treatments.size(); ++i) {
      const auto k = j * treatments.size() + i;
      if (count[k] == 0) continue;
      const double m = y(sum[k] / count[k]);
      doc.line(slot_center(j, i) - slot_w * 0.35, m, slot_center(j, i) + slot_w * 0.35, m,
               "mean");
    }
  return doc.str("Strip plot: " + report.provenance.input);
}

inline std::string forest_plot(const AnalysisReport& report) {
  if (!report.effects)
    throw ConfigError("a forest plot needs per-batch effects: " +
                      report.effects_unavailable_reason);
  const auto& e = *report.effects;
  std::vector<const BatchEffect*> rows;
  for (const auto& b : e.per_batch) rows.push_back(&b);
  rows.push_back(&e.overall);

  double lo = 0.0, hi = 0.0;
  for (const auto* b : rows) {
    lo = std::min(lo, b->ci_low);
    hi = std::max(hi, b->ci_high);
  }
  double step = 1.0;
  const auto [d0, d1] = padded_domain(lo, hi, step);

  std::size_t label_chars = 6;
  for (const auto* b : rows) label_chars = std::max(label_chars, b->batch.size());
  const double left = 20 + 7.0 * label_chars, right = 30, top = 50, row_h = 32;
  const double plot_w = 420;
  const int width = static_cast<int>(left + plot_w + right);
  const int height = static_cast<int>(top + row_h * (rows.size() + 0.5) + 50);
  const LinearScale x{d0, d1, left, left + plot_w};
  const double axis_y = top + row_h * (rows.size() + 0.5);
  Document doc(width, height);

  char level[16];
  std::snprintf(level, sizeof level, "%g", 100.0 * e.confidence);
  doc.text(width / 2.0, 22, "Effect of " + e.treated + " vs " + e.reference + " by batch (" +
                                level + "% CI)",
           "middle", "font-weight=\"bold\"");
  for (int k = 0; d0 + k * step <= d1 + step * 1e-9; ++k) {
    const double v = d0 + k * step;
    doc.line(x(v), top, x(v), axis_y, "grid");
    doc.text(x(v), axis_y + 16, tick_label(v, step));
  }
  doc.line(left, axis_y, left + plot_w, axis_y, "axis");
  doc.line(x(0.0), top, x(0.0), axis_y, "zero");
  doc.text(left + plot_w / 2.0, axis_y + 36, "Difference in means (" + e.treated + " - " +
                                                 e.reference + ")");

  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& b = *rows[k];
    const double cy = top + row_h * (k + 0.5);
    const bool pooled = k + 1 == rows.size();
    std::string g = "<g class=\"interval\">";
    g += "<line class=\"ci\" x1=\"" + num(x(b.ci_low)) + "\" y1=\"" + num(cy) + "\" x2=\"" +
         num(x(b.ci_high)) + "\" y2=\"" + num(cy) + "\"/>";
    if (pooled) {
      const double cx = x(b.diff);
      g += "<polygon points=\"" + num(cx - 7) + "," + num(cy) + " " + num(cx) + "," +
           num(cy - 7) + " " + num(cx + 7) + "," + num(cy) + " " + num(cx) + "," +
           num(cy + 7) + "\" fill=\"#222\"/>";
    } else {
      g += "<rect x=\"" + num(x(b.diff) - 4) + "\" y=\"" + num(cy - 4) +
           "\" width=\"8\" height=\"8\" fill=\"#1b6ca8\"/>";
    }
    g += "</g>";
    doc.add(g);
    doc.text(left - 8, cy + 4, b.batch, "end", pooled ? "font-weight=\"bold\"" : "");
  }
  return doc.str("Forest plot: " + report.provenance.input);
}

}  // namespace svg

// Self-contained SVG 1.1. The strip plot jitters points from `seed`, so the
// same report and seed give byte-identical output.
inline std::string render_svg(const AnalysisReport& report, PlotKind kind,
                              std::uint64_t seed = default_seed) {
  return kind == PlotKind::strip ? svg::strip_plot(report, seed) : svg::forest_plot(report);
}

inline void write_svg(const AnalysisReport& report, PlotKind kind, const std::string& path,
                      std::uint64_t seed = default_seed) {
  const auto text = render_svg(report, kind, seed);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace replicheck
