#include "cfx/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cfx {

namespace {

constexpr double kWidth = 960.0;
constexpr double kPanelHeight = 130.0;
constexpr double kPanelGap = 24.0;
constexpr double kMarginLeft = 56.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 40.0;
constexpr double kStripHeight = 8.0;

const char* kCfPalette[] = {"#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string polyline(const Series& s, int channel, double x0, double x_scale, double y_base,
                     double y_scale, double v_min) {
  std::string pts;
  pts.reserve(static_cast<std::size_t>(s.t) * 12);
  for (int t = 0; t < s.t; ++t) {
    double x = x0 + t * x_scale;
    double y = y_base - (s.at(t, channel) - v_min) * y_scale;
    pts += num(x);
    pts += ',';
    pts += num(y);
    if (t + 1 < s.t) pts += ' ';
  }
  return pts;
}

}  // namespace

void render_overlay(const Series& query,
                    const std::vector<std::pair<std::string, const Series*>>& cf_variants,
                    const Mask* mask, const std::vector<float>* attribution,
                    const std::filesystem::path& out_path) {
  for (const auto& [name, cf] : cf_variants)
    if (cf->t != query.t || cf->c != query.c)
      throw CfxError("render_overlay: variant " + name + " shape differs from query");
  if (mask && (mask->t != query.t || mask->c != query.c))
    throw CfxError("render_overlay: mask shape differs from query");
  if (attribution && attribution->size() != query.values.size())
    throw CfxError("render_overlay: attribution size differs from query");

  int c = query.c;
  double strip = attribution ? kStripHeight + 4.0 : 0.0;
  double height = kMarginTop + c * (kPanelHeight + strip + kPanelGap);
  double plot_w = kWidth - kMarginLeft - kMarginRight;
  double x_scale = query.t > 1 ? plot_w / static_cast<double>(query.t - 1) : plot_w;

  double attr_max = 0.0;
  if (attribution)
    for (float a : *attribution) attr_max = std::max(attr_max, static_cast<double>(std::abs(a)));

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Legend.
  svg += "<text x=\"" + num(kMarginLeft) + "\" y=\"20\" font-family=\"monospace\" font-size=\"13\" "
         "fill=\"#1f77b4\">query " + query.record_id + "</text>\n";
  double legend_x = kMarginLeft + 260.0;
  for (std::size_t vi = 0; vi < cf_variants.size(); ++vi) {
    svg += "<text x=\"" + num(legend_x) + "\" y=\"20\" font-family=\"monospace\" font-size=\"13\" "
           "fill=\"" + kCfPalette[vi % 4] + "\">" + cf_variants[vi].first + "</text>\n";
    legend_x += 170.0;
  }

  for (int ch = 0; ch < c; ++ch) {
    double panel_top = kMarginTop + ch * (kPanelHeight + strip + kPanelGap);
    double panel_bottom = panel_top + kPanelHeight;

    double v_min = query.at(0, ch), v_max = query.at(0, ch);
    for (int t = 0; t < query.t; ++t) {
      v_min = std::min(v_min, static_cast<double>(query.at(t, ch)));
      v_max = std::max(v_max, static_cast<double>(query.at(t, ch)));
    }
    for (const auto& [name, cf] : cf_variants)
      for (int t = 0; t < cf->t; ++t) {
        v_min = std::min(v_min, static_cast<double>(cf->at(t, ch)));
        v_max = std::max(v_max, static_cast<double>(cf->at(t, ch)));
      }
    double span = v_max - v_min;
    if (span <= 0.0) span = 1.0;
    v_min -= 0.05 * span;
    double y_scale = kPanelHeight / (span * 1.1);

    svg += "<rect x=\"" + num(kMarginLeft) + "\" y=\"" + num(panel_top) + "\" width=\"" +
           num(plot_w) + "\" height=\"" + num(kPanelHeight) +
           "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
    svg += "<text x=\"8\" y=\"" + num(panel_top + kPanelHeight / 2) +
           "\" font-family=\"monospace\" font-size=\"12\" fill=\"#333333\">ch" +
           std::to_string(ch) + "</text>\n";

    // Shaded modified regions.
    if (mask) {
      int run_start = -1;
      for (int t = 0; t <= query.t; ++t) {
        bool on = t < query.t && mask->at(t, ch);
        if (on && run_start < 0) run_start = t;
        if (!on && run_start >= 0) {
          double x0 = kMarginLeft + run_start * x_scale;
          double x1 = kMarginLeft + (t - 1) * x_scale;
          svg += "<rect class=\"mask-region\" x=\"" + num(x0) + "\" y=\"" + num(panel_top) +
                 "\" width=\"" + num(std::max(x1 - x0, 1.0)) + "\" height=\"" +
                 num(kPanelHeight) + "\" fill=\"#ffd27f\" fill-opacity=\"0.45\"/>\n";
          run_start = -1;
        }
      }
    }

    svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" points=\"" +
           polyline(query, ch, kMarginLeft, x_scale, panel_bottom, y_scale, v_min) + "\"/>\n";
    for (std::size_t vi = 0; vi < cf_variants.size(); ++vi) {
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(kCfPalette[vi % 4]) +
             "\" stroke-width=\"1.2\" stroke-dasharray=\"4,2\" points=\"" +
             polyline(*cf_variants[vi].second, ch, kMarginLeft, x_scale, panel_bottom, y_scale,
                      v_min) +
             "\"/>\n";
    }

    if (attribution && attr_max > 0.0) {
      double strip_top = panel_bottom + 2.0;
      for (int t = 0; t < query.t; ++t) {
        double a = std::abs(
            (*attribution)[static_cast<std::size_t>(t) * query.c + ch]) / attr_max;
        if (a < 0.01) continue;
        char op[16];
        std::snprintf(op, sizeof(op), "%.3f", a);
        svg += "<rect class=\"attr-strip\" x=\"" + num(kMarginLeft + t * x_scale) + "\" y=\"" +
               num(strip_top) + "\" width=\"" + num(std::max(x_scale, 0.8)) + "\" height=\"" +
               num(kStripHeight) + "\" fill=\"#7f0000\" fill-opacity=\"" + op + "\"/>\n";
      }
    }
  }
  svg += "</svg>\n";
  atomic_write(out_path, svg);
}

}  // namespace cfx
