#include "genesis/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "genesis/errors.hpp"

namespace genesis {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

// Linear blend between white and a saturated endpoint; t in [0, 1].
std::string blend(double t, int r, int g, int b) {
  t = std::clamp(t, 0.0, 1.0);
  const int rr = static_cast<int>(std::lround(255 + t * (r - 255)));
  const int gg = static_cast<int>(std::lround(255 + t * (g - 255)));
  const int bb = static_cast<int>(std::lround(255 + t * (b - 255)));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rr, gg, bb);
  return buf;
}

// Diverging map centered at zero: positive bound rates toward blue,
// negative toward red.
std::string color_for(double value, double vmax) {
  if (std::isnan(value)) return "#9e9e9e";
  const double t = vmax > 0.0 ? std::abs(value) / vmax : 0.0;
  return value >= 0.0 ? blend(t, 0x21, 0x66, 0xac) : blend(t, 0xb2, 0x18, 0x2b);
}

// Cell edges at midpoints of consecutive centers; outer edges mirror the
// first/last gap. A single center gets a symmetric half-unit pad.
std::vector<double> edges_for(const std::vector<double>& centers) {
  std::vector<double> edges;
  if (centers.size() == 1) {
    const double pad = std::max(0.5 * std::abs(centers[0]), 0.5);
    return {centers[0] - pad, centers[0] + pad};
  }
  edges.push_back(centers[0] - 0.5 * (centers[1] - centers[0]));
  for (size_t i = 0; i + 1 < centers.size(); ++i)
    edges.push_back(0.5 * (centers[i] + centers[i + 1]));
  edges.push_back(centers.back() +
                  0.5 * (centers.back() - centers[centers.size() - 2]));
  return edges;
}

}  // namespace

SweepResult sweep_from_csv(const std::string& text) {
  SweepResult result;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  std::map<std::string, size_t> columns;
  const std::vector<std::string> required = {
      "panel_trans", "panel_rec", "mu_t",       "mu_r_norm",
      "eta_A",       "bound_rate", "fit_l1_trans", "fit_l1_rec",
      "graph_hash",  "seed",       "error"};
  bool have_header = false;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string key;
      meta >> key;
      if (key == "lambda_max") meta >> result.lambda_max;
      if (key == "graph") meta >> result.graph_digest;
      if (key == "seed") meta >> result.seed;
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (!have_header) {
      for (size_t i = 0; i < fields.size(); ++i) columns[fields[i]] = i;
      for (const std::string& name : required)
        if (!columns.count(name))
          throw ParseError(line_no, "missing column '" + name + "'");
      have_header = true;
      continue;
    }
    if (fields.size() < required.size())
      throw ParseError(line_no, "row has " + std::to_string(fields.size()) +
                                    " fields, want " +
                                    std::to_string(required.size()));
    SweepCell cell;
    try {
      cell.panel_trans = fields[columns["panel_trans"]];
      cell.panel_rec = fields[columns["panel_rec"]];
      cell.mu_t = std::stod(fields[columns["mu_t"]]);
      cell.mu_r_norm = std::stod(fields[columns["mu_r_norm"]]);
      cell.eta_a = std::stod(fields[columns["eta_A"]]);
      cell.bound_rate = std::stod(fields[columns["bound_rate"]]);
      cell.fit_l1_trans = std::stod(fields[columns["fit_l1_trans"]]);
      cell.fit_l1_rec = std::stod(fields[columns["fit_l1_rec"]]);
      cell.error = fields[columns["error"]];
      cell.mu_r = cell.mu_r_norm * result.lambda_max;
      if (result.graph_digest.empty())
        result.graph_digest = fields[columns["graph_hash"]];
    } catch (const std::exception&) {
      throw ParseError(line_no, "malformed row: '" + line + "'");
    }
    result.cells.push_back(std::move(cell));
  }
  if (!have_header) throw ParseError(line_no, "no header row found");
  return result;
}

std::string render_heatmap(const SweepResult& result,
                           const std::string& panel_trans,
                           const std::string& panel_rec) {
  std::vector<const SweepCell*> cells;
  for (const SweepCell& cell : result.cells)
    if (cell.panel_trans == panel_trans && cell.panel_rec == panel_rec)
      cells.push_back(&cell);
  if (cells.empty())
    throw std::invalid_argument("no cells for panel trans=" + panel_trans +
                                " rec=" + panel_rec);

  std::vector<double> xs, ys;
  for (const SweepCell* cell : cells) {
    xs.push_back(cell->mu_t);
    ys.push_back(cell->mu_r_norm);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> value(
      xs.size(), std::vector<double>(ys.size(), nan));
  for (const SweepCell* cell : cells) {
    const size_t xi = static_cast<size_t>(
        std::lower_bound(xs.begin(), xs.end(), cell->mu_t) - xs.begin());
    const size_t yi = static_cast<size_t>(
        std::lower_bound(ys.begin(), ys.end(), cell->mu_r_norm) - ys.begin());
    if (cell->error.empty()) value[xi][yi] = cell->bound_rate;
  }

  double vmax = 0.0;
  for (const auto& column : value)
    for (double v : column)
      if (!std::isnan(v)) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0) vmax = 1.0;

  // Pixel layout: fixed frame, y axis upward.
  const double left = 80, top = 40, width = 480, height = 360;
  const double right = left + width, bottom = top + height;
  const std::vector<double> xe = edges_for(xs), ye = edges_for(ys);
  auto px = [&](double x) {
    return left + (x - xe.front()) / (xe.back() - xe.front()) * width;
  };
  auto py = [&](double y) {
    return bottom - (y - ye.front()) / (ye.back() - ye.front()) * height;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
         "width=\"700\" height=\"470\" viewBox=\"0 0 700 470\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"700\" height=\"470\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + fmt(left) + "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"15\">transmission " + panel_trans + " / recovery " +
         panel_rec + "</text>\n";

  for (size_t xi = 0; xi < xs.size(); ++xi)
    for (size_t yi = 0; yi < ys.size(); ++yi) {
      const double x0 = px(xe[xi]), x1 = px(xe[xi + 1]);
      const double y0 = py(ye[yi + 1]), y1 = py(ye[yi]);
      svg += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" +
             fmt(x1 - x0) + "\" height=\"" + fmt(y1 - y0) + "\" fill=\"" +
             color_for(value[xi][yi], vmax) + "\"/>\n";
    }

  // Zero contour by marching squares over the center grid.
  if (xs.size() >= 2 && ys.size() >= 2) {
    std::string contour;
    for (size_t xi = 0; xi + 1 < xs.size(); ++xi)
      for (size_t yi = 0; yi + 1 < ys.size(); ++yi) {
        const double v00 = value[xi][yi], v10 = value[xi + 1][yi];
        const double v01 = value[xi][yi + 1], v11 = value[xi + 1][yi + 1];
        if (std::isnan(v00) || std::isnan(v10) || std::isnan(v01) || std::isnan(v11))
          continue;
        // Crossing points on the four quad edges, in pixel space.
        std::vector<std::pair<double, double>> pts;
        auto edge = [&](double va, double vb, double xa, double ya, double xb,
                        double yb) {
          if ((va >= 0.0) == (vb >= 0.0) || va == vb) return;
          const double t = (0.0 - va) / (vb - va);
          pts.emplace_back(px(xa + t * (xb - xa)), py(ya + t * (yb - ya)));
        };
        edge(v00, v10, xs[xi], ys[yi], xs[xi + 1], ys[yi]);
        edge(v10, v11, xs[xi + 1], ys[yi], xs[xi + 1], ys[yi + 1]);
        edge(v01, v11, xs[xi], ys[yi + 1], xs[xi + 1], ys[yi + 1]);
        edge(v00, v01, xs[xi], ys[yi], xs[xi], ys[yi + 1]);
        if (pts.size() == 2) {
          contour += "<line x1=\"" + fmt(pts[0].first) + "\" y1=\"" +
                     fmt(pts[0].second) + "\" x2=\"" + fmt(pts[1].first) +
                     "\" y2=\"" + fmt(pts[1].second) +
                     "\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
        } else if (pts.size() == 4) {
          // Saddle: pair crossings by the sign of the center average.
          const double center = 0.25 * (v00 + v10 + v01 + v11);
          const int a = 0, b = center >= 0.0 ? 3 : 1;
          const int c = center >= 0.0 ? 1 : 3, d = 2;
          contour += "<line x1=\"" + fmt(pts[a].first) + "\" y1=\"" +
                     fmt(pts[a].second) + "\" x2=\"" + fmt(pts[b].first) +
                     "\" y2=\"" + fmt(pts[b].second) +
                     "\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
          contour += "<line x1=\"" + fmt(pts[c].first) + "\" y1=\"" +
                     fmt(pts[c].second) + "\" x2=\"" + fmt(pts[d].first) +
                     "\" y2=\"" + fmt(pts[d].second) +
                     "\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
        }
      }
    svg += contour;
  }

  // Frame and axis ticks.
  svg += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" +
         fmt(width) + "\" height=\"" + fmt(height) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";
  const size_t x_stride = std::max<size_t>(1, (xs.size() + 7) / 8);
  for (size_t xi = 0; xi < xs.size(); xi += x_stride) {
    const double x = px(xs[xi]);
    svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(bottom) + "\" x2=\"" +
           fmt(x) + "\" y2=\"" + fmt(bottom + 5) + "\" stroke=\"#333333\"/>\n";
    svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(bottom + 18) +
           "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\">" + fmt(xs[xi]) + "</text>\n";
  }
  const size_t y_stride = std::max<size_t>(1, (ys.size() + 7) / 8);
  for (size_t yi = 0; yi < ys.size(); yi += y_stride) {
    const double y = py(ys[yi]);
    svg += "<line x1=\"" + fmt(left - 5) + "\" y1=\"" + fmt(y) + "\" x2=\"" +
           fmt(left) + "\" y2=\"" + fmt(y) + "\" stroke=\"#333333\"/>\n";
    svg += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"end\">" + fmt(ys[yi]) + "</text>\n";
  }
  svg += "<text x=\"" + fmt(left + width / 2) + "\" y=\"" + fmt(bottom + 38) +
         "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\">transmission mean</text>\n";
  svg += "<text x=\"20\" y=\"" + fmt(top + height / 2) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 20 " + fmt(top + height / 2) +
         ")\">recovery mean / spectral radius</text>\n";

  // Legend: discrete gradient bar from -vmax to +vmax.
  const double legend_x = right + 30, legend_w = 18;
  const int bands = 48;
  for (int i = 0; i < bands; ++i) {
    const double v = vmax - (2.0 * vmax) * (i + 0.5) / bands;
    const double y = top + height * i / bands;
    svg += "<rect x=\"" + fmt(legend_x) + "\" y=\"" + fmt(y) + "\" width=\"" +
           fmt(legend_w) + "\" height=\"" + fmt(height / bands + 0.5) +
           "\" fill=\"" + color_for(v, vmax) + "\"/>\n";
  }
  svg += "<rect x=\"" + fmt(legend_x) + "\" y=\"" + fmt(top) + "\" width=\"" +
         fmt(legend_w) + "\" height=\"" + fmt(height) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";
  for (double v : {vmax, 0.0, -vmax}) {
    const double y = top + height * (vmax - v) / (2.0 * vmax);
    svg += "<text x=\"" + fmt(legend_x + legend_w + 6) + "\" y=\"" + fmt(y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + fmt(v) +
           "</text>\n";
  }
  svg += "<text x=\"" + fmt(legend_x) + "\" y=\"" + fmt(top - 8) +
         "\" font-family=\"sans-serif\" font-size=\"12\">decay rate bound</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace genesis
