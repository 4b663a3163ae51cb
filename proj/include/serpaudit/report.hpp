// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Static report emission: grouped bar charts with bootstrap whiskers and
// significance stars, stacked leaning panels, metric grids, and time-drift
// lines. Every chart is hand-emitted SVG (no plotting dependency) with a
// sibling CSV carrying the exact plotted numbers; output is byte
// deterministic for identical inputs.

#ifndef SERPAUDIT_REPORT_HPP
#define SERPAUDIT_REPORT_HPP

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "serpaudit/analyze.hpp"
#include "serpaudit/annotate.hpp"
#include "serpaudit/errors.hpp"
#include "serpaudit/stats.hpp"
#include "serpaudit/vocab.hpp"

namespace serpaudit::report {

// Shortest decimal representation that round-trips the double.
inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf.data(), ptr);
}

struct EmitResult {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

namespace detail {

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::filesystem::create_directories(
      std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("write failure: " + path);
}

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Round the axis maximum up to a clean step multiple.
inline double nice_ceiling(double maxv) {
  if (maxv <= 0.0) return 1.0;
  double step = std::pow(10.0, std::floor(std::log10(maxv)));
  double scaled = maxv / step;
  double factor = scaled <= 1.0 ? 1.0 : scaled <= 2.0 ? 2.0
                  : scaled <= 5.0 ? 5.0 : 10.0;
  return factor * step;
}

struct Layout {
  double width = 760, height = 430;
  double left = 70, right = 20, top = 40, bottom = 80;
  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
  double y_of(double value, double y_max) const {
    return top + plot_h() * (1.0 - value / y_max);
  }
};

inline std::string svg_header(const Layout& l, const std::string& title) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
       format_number(l.width) + "\" height=\"" + format_number(l.height) +
       "\" font-family=\"sans-serif\">\n";
  s += "  <defs>\n";
  s += "    <pattern id=\"hatch-light\" width=\"6\" height=\"6\" "
       "patternTransform=\"rotate(45)\" patternUnits=\"userSpaceOnUse\">\n"
       "      <rect width=\"6\" height=\"6\" fill=\"#a6d96a\"/>\n"
       "      <line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#ffffff\" "
       "stroke-width=\"2\"/>\n    </pattern>\n";
  s += "    <pattern id=\"hatch-dark\" width=\"6\" height=\"6\" "
       "patternTransform=\"rotate(45)\" patternUnits=\"userSpaceOnUse\">\n"
       "      <rect width=\"6\" height=\"6\" fill=\"#1a9641\"/>\n"
       "      <line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#ffffff\" "
       "stroke-width=\"2\"/>\n    </pattern>\n";
  s += "  </defs>\n";
  s += "  <text x=\"" + format_number(l.width / 2) +
       "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
       svg_escape(title) + "</text>\n";
  return s;
}

inline std::string svg_y_axis(const Layout& l, double y_max,
                              const std::string& label) {
  std::string s;
  s += "  <line x1=\"" + format_number(l.left) + "\" y1=\"" +
       format_number(l.top) + "\" x2=\"" + format_number(l.left) +
       "\" y2=\"" + format_number(l.top + l.plot_h()) +
       "\" stroke=\"#000000\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    double v = y_max * t / 5.0;
    double y = l.y_of(v, y_max);
    s += "  <line x1=\"" + format_number(l.left - 4) + "\" y1=\"" +
         format_number(y) + "\" x2=\"" + format_number(l.left) + "\" y2=\"" +
         format_number(y) + "\" stroke=\"#000000\"/>\n";
    s += "  <text x=\"" + format_number(l.left - 8) + "\" y=\"" +
         format_number(y + 4) + "\" text-anchor=\"end\" font-size=\"10\">" +
         format_number(v) + "</text>\n";
  }
  s += "  <text x=\"16\" y=\"" + format_number(l.top + l.plot_h() / 2) +
       "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 16 " +
       format_number(l.top + l.plot_h() / 2) + ")\">" + svg_escape(label) +
       "</text>\n";
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Grouped bar panel (location/category means, URL or category metric).
// ---------------------------------------------------------------------------

// Bar order within one engine group. Light fill = same location, dark =
// different location; hatching = specific queries.
inline const std::array<analyze::CellKey, 4>& bar_slots_for(
    const std::string& engine) {
  static thread_local std::array<analyze::CellKey, 4> slots;
  slots = {analyze::CellKey{engine, analyze::Grouping::kSameLocation,
                            QueryCategory::kGeneral},
           analyze::CellKey{engine, analyze::Grouping::kDiffLocation,
                            QueryCategory::kGeneral},
           analyze::CellKey{engine, analyze::Grouping::kSameLocation,
                            QueryCategory::kSpecific},
           analyze::CellKey{engine, analyze::Grouping::kDiffLocation,
                            QueryCategory::kSpecific}};
  return slots;
}

// Emits <basename>.csv (+ <basename>_tests.csv when tests are present) and
// <basename>.svg under out_dir. Missing grid cells leave a gap marker
// comment in the SVG and a warning in the result.
inline EmitResult emit_bar_panel(const analyze::GroupMeansResult& means,
                                 const std::vector<stats::StatResult>& tests,
                                 const std::string& title,
                                 const std::string& value_label,
                                 const std::string& out_dir,
                                 const std::string& basename) {
  if (means.cells.empty()) throw Error("empty dataset for " + basename);
  namespace fs = std::filesystem;
  EmitResult result;

  std::set<std::string> engine_set;
  for (const auto& [key, ci] : means.cells) engine_set.insert(key.engine);
  std::vector<std::string> engines(engine_set.begin(), engine_set.end());

  // CSV twin: exactly the numbers drawn.
  std::string csv =
      "engine,grouping,query_category,mean,ci_lo,ci_hi,resamples\n";
  for (const std::string& engine : engines) {
    for (const analyze::CellKey& key : bar_slots_for(engine)) {
      auto it = means.cells.find(key);
      if (it == means.cells.end()) continue;
      csv += engine + "," + analyze::to_string(key.grouping) + "," +
             to_string(key.category) + "," + format_number(it->second.mean) +
             "," + format_number(it->second.lo) + "," +
             format_number(it->second.hi) + "," +
             std::to_string(it->second.resamples) + "\n";
    }
  }
  std::string csv_path = (fs::path(out_dir) / (basename + ".csv")).string();
  detail::write_text_file(csv_path, csv);
  result.files.push_back(csv_path);

  if (!tests.empty()) {
    std::string tests_csv =
        "group_a,group_b,statistic,p_value,family_size,p_adjusted,stars\n";
    for (const stats::StatResult& r : tests) {
      std::string a = r.group_labels.size() > 0 ? r.group_labels[0] : "";
      std::string b = r.group_labels.size() > 1 ? r.group_labels[1] : "";
      tests_csv += a + "," + b + "," + format_number(r.statistic) + "," +
                   format_number(r.p_value) + "," +
                   std::to_string(r.family_size) + "," +
                   format_number(r.p_adjusted) + "," +
                   stats::to_string(r.stars) + "\n";
    }
    std::string tests_path =
        (fs::path(out_dir) / (basename + "_tests.csv")).string();
    detail::write_text_file(tests_path, tests_csv);
    result.files.push_back(tests_path);
  }

  // SVG panel.
  detail::Layout l;
  double y_max = 0.0;
  for (const auto& [key, ci] : means.cells) y_max = std::max(y_max, ci.hi);
  y_max = detail::nice_ceiling(y_max * 1.15);

  std::string svg = detail::svg_header(l, title);
  svg += detail::svg_y_axis(l, y_max, value_label);

  double group_w = l.plot_w() / static_cast<double>(engines.size());
  double slot_w = group_w / 5.0;
  auto bar_center = [&](std::size_t engine_idx, int slot) {
    return l.left + group_w * static_cast<double>(engine_idx) +
           slot_w * (static_cast<double>(slot) + 1.0);
  };

  const char* fills[4] = {"#a6d96a", "#1a9641", "url(#hatch-light)",
                          "url(#hatch-dark)"};
  std::map<std::string, std::pair<std::size_t, int>> slot_of_label;
  for (std::size_t e = 0; e < engines.size(); ++e) {
    const auto& slots = bar_slots_for(engines[e]);
    for (int s = 0; s < 4; ++s) {
      const analyze::CellKey& key = slots[static_cast<std::size_t>(s)];
      std::string label = engines[e] + "/" + analyze::to_string(key.grouping) +
                          "/" + to_string(key.category);
      slot_of_label[label] = {e, s};
      auto it = means.cells.find(key);
      if (it == means.cells.end()) {
        svg += "  <!-- gap: " + detail::svg_escape(label) + " -->\n";
        result.warnings.push_back("missing cell: " + label);
        continue;
      }
      const stats::BootstrapCI& ci = it->second;
      double cx = bar_center(e, s);
      double x = cx - slot_w * 0.4;
      double w = slot_w * 0.8;
      double y = l.y_of(ci.mean, y_max);
      double h = l.top + l.plot_h() - y;
      svg += "  <rect x=\"" + format_number(x) + "\" y=\"" + format_number(y) +
             "\" width=\"" + format_number(w) + "\" height=\"" +
             format_number(h) + "\" fill=\"" +
             fills[s] + "\" stroke=\"#333333\"/>\n";
      double ylo = l.y_of(ci.lo, y_max);
      double yhi = l.y_of(ci.hi, y_max);
      svg += "  <line x1=\"" + format_number(cx) + "\" y1=\"" +
             format_number(ylo) + "\" x2=\"" + format_number(cx) + "\" y2=\"" +
             format_number(yhi) + "\" stroke=\"#000000\"/>\n";
      for (double yy : {ylo, yhi})
        svg += "  <line x1=\"" + format_number(cx - 4) + "\" y1=\"" +
               format_number(yy) + "\" x2=\"" + format_number(cx + 4) +
               "\" y2=\"" + format_number(yy) + "\" stroke=\"#000000\"/>\n";
    }
    double gx = l.left + group_w * (static_cast<double>(e) + 0.5);
    svg += "  <text x=\"" + format_number(gx) + "\" y=\"" +
           format_number(l.top + l.plot_h() + 18) +
           "\" text-anchor=\"middle\" font-size=\"11\">" +
           detail::svg_escape(engines[e]) + "</text>\n";
  }

  // Star brackets between compared bars, stacked upward per engine group.
  std::map<std::size_t, int> bracket_level;
  for (const stats::StatResult& r : tests) {
    if (r.stars == stats::Stars::kNone || r.group_labels.size() != 2) continue;
    auto a = slot_of_label.find(r.group_labels[0]);
    auto b = slot_of_label.find(r.group_labels[1]);
    if (a == slot_of_label.end() || b == slot_of_label.end()) continue;
    if (a->second.first != b->second.first) continue;
    std::size_t e = a->second.first;
    int level = bracket_level[e]++;
    double y = l.top - 6 - 12 * level;
    double xa = bar_center(e, a->second.second);
    double xb = bar_center(e, b->second.second);
    svg += "  <line x1=\"" + format_number(xa) + "\" y1=\"" +
           format_number(y + 3) + "\" x2=\"" + format_number(xb) + "\" y2=\"" +
           format_number(y + 3) + "\" stroke=\"#000000\"/>\n";
    svg += "  <text x=\"" + format_number((xa + xb) / 2) + "\" y=\"" +
           format_number(y) + "\" text-anchor=\"middle\" font-size=\"11\">" +
           stats::to_string(r.stars) + "</text>\n";
  }

  // Legend.
  double ly = l.top + l.plot_h() + 36;
  const char* legend_fill[4] = {"#a6d96a", "#1a9641", "url(#hatch-light)",
                                "url(#hatch-dark)"};
  const char* legend_text[4] = {"same location / general",
                                "diff location / general",
                                "same location / specific",
                                "diff location / specific"};
  for (int i = 0; i < 4; ++i) {
    double lx = l.left + 170.0 * i;
    svg += "  <rect x=\"" + format_number(lx) + "\" y=\"" +
           format_number(ly) + "\" width=\"12\" height=\"12\" fill=\"" +
           legend_fill[i] + "\" stroke=\"#333333\"/>\n";
    svg += "  <text x=\"" + format_number(lx + 16) + "\" y=\"" +
           format_number(ly + 10) + "\" font-size=\"10\">" + legend_text[i] +
           "</text>\n";
  }
  for (const std::string& note : means.notes)
    svg += "  <!-- note: " + detail::svg_escape(note) + " -->\n";
  svg += "</svg>\n";

  std::string svg_path = (fs::path(out_dir) / (basename + ".svg")).string();
  detail::write_text_file(svg_path, svg);
  result.files.push_back(svg_path);
  return result;
}

// ---------------------------------------------------------------------------
// Leaning panel: stacked shares per (engine, location).
// ---------------------------------------------------------------------------

inline EmitResult emit_leaning_panel(const annotate::LeaningPanel& panel,
                                     const std::string& title,
                                     const std::string& out_dir,
                                     const std::string& basename) {
  if (panel.cells.empty()) throw Error("empty dataset for " + basename);
  namespace fs = std::filesystem;
  EmitResult result;

  std::string csv = "engine,location,leaning,proportion,denominator\n";
  for (const annotate::LeaningCell& cell : panel.cells)
    for (vocab::Leaning l : vocab::all_leanings())
      csv += cell.engine + "," + cell.location + "," + vocab::to_string(l) +
             "," +
             format_number(cell.proportions[static_cast<std::size_t>(
                 vocab::leaning_index(l))]) +
             "," + std::to_string(cell.denominator) + "\n";
  std::string csv_path = (fs::path(out_dir) / (basename + ".csv")).string();
  detail::write_text_file(csv_path, csv);
  result.files.push_back(csv_path);

  detail::Layout l;
  std::string svg = detail::svg_header(l, title);
  svg += detail::svg_y_axis(l, 1.0, "share of resolved News results");
  const char* fills[vocab::kLeaningCount] = {"#2166ac", "#67a9cf", "#bbbbbb",
                                             "#ef8a62", "#b2182b"};
  double group_w = l.plot_w() / static_cast<double>(panel.cells.size());
  for (std::size_t i = 0; i < panel.cells.size(); ++i) {
    const annotate::LeaningCell& cell = panel.cells[i];
    double x = l.left + group_w * (static_cast<double>(i) + 0.5) -
               group_w * 0.3;
    double w = group_w * 0.6;
    double acc = 0.0;
    for (vocab::Leaning lean : vocab::all_leanings()) {
      double share = cell.proportions[static_cast<std::size_t>(
          vocab::leaning_index(lean))];
      if (share <= 0.0) continue;
      double y_top = l.y_of(acc + share, 1.0);
      double y_bot = l.y_of(acc, 1.0);
      svg += "  <rect x=\"" + format_number(x) + "\" y=\"" +
             format_number(y_top) + "\" width=\"" + format_number(w) +
             "\" height=\"" + format_number(y_bot - y_top) + "\" fill=\"" +
             fills[vocab::leaning_index(lean)] + "\" stroke=\"#333333\"/>\n";
      acc += share;
    }
    svg += "  <text x=\"" + format_number(x + w / 2) + "\" y=\"" +
           format_number(l.top + l.plot_h() + 18) +
           "\" text-anchor=\"middle\" font-size=\"10\">" +
           detail::svg_escape(cell.engine + "/" + cell.location) +
           "</text>\n";
  }
  double ly = l.top + l.plot_h() + 36;
  for (vocab::Leaning lean : vocab::all_leanings()) {
    double lx = l.left + 136.0 * vocab::leaning_index(lean);
    svg += "  <rect x=\"" + format_number(lx) + "\" y=\"" +
           format_number(ly) + "\" width=\"12\" height=\"12\" fill=\"" +
           fills[vocab::leaning_index(lean)] + "\" stroke=\"#333333\"/>\n";
    svg += "  <text x=\"" + format_number(lx + 16) + "\" y=\"" +
           format_number(ly + 10) + "\" font-size=\"10\">" +
           detail::svg_escape(vocab::to_string(lean)) + "</text>\n";
  }
  for (const std::string& note : panel.notes) {
    svg += "  <!-- note: " + detail::svg_escape(note) + " -->\n";
    result.warnings.push_back(note);
  }
  svg += "</svg>\n";
  std::string svg_path = (fs::path(out_dir) / (basename + ".svg")).string();
  detail::write_text_file(svg_path, svg);
  result.files.push_back(svg_path);
  return result;
}

// ---------------------------------------------------------------------------
// Metrics grid: one bar panel row per metric, normalized per metric.
// ---------------------------------------------------------------------------

inline EmitResult emit_metrics_grid(
    const std::map<Metric, analyze::GroupMeansResult>& by_metric,
    const std::string& title, const std::string& out_dir,
    const std::string& basename) {
  if (by_metric.empty()) throw Error("empty dataset for " + basename);
  namespace fs = std::filesystem;
  EmitResult result;

  std::string csv =
      "metric,engine,grouping,query_category,mean,ci_lo,ci_hi\n";
  for (const auto& [metric, means] : by_metric)
    for (const auto& [key, ci] : means.cells)
      csv += to_string(metric) + "," + key.engine + "," +
             analyze::to_string(key.grouping) + "," +
             to_string(key.category) + "," + format_number(ci.mean) + "," +
             format_number(ci.lo) + "," + format_number(ci.hi) + "\n";
  std::string csv_path = (fs::path(out_dir) / (basename + ".csv")).string();
  detail::write_text_file(csv_path, csv);
  result.files.push_back(csv_path);

  // One normalized row of bars per metric.
  detail::Layout l;
  l.height = 120.0 + 90.0 * static_cast<double>(by_metric.size());
  std::string svg = detail::svg_header(l, title);
  double row_h = 70.0;
  double row_y = l.top;
  for (const auto& [metric, means] : by_metric) {
    double y_max = 0.0;
    for (const auto& [key, ci] : means.cells)
      y_max = std::max(y_max, ci.hi);
    y_max = detail::nice_ceiling(y_max <= 0.0 ? 1.0 : y_max);
    svg += "  <text x=\"" + format_number(l.left) + "\" y=\"" +
           format_number(row_y - 4) + "\" font-size=\"11\">" +
           detail::svg_escape(to_string(metric) + " (axis max " +
                              format_number(y_max) + ")") +
           "</text>\n";
    double bar_w = l.plot_w() / static_cast<double>(means.cells.size() + 1);
    std::size_t i = 0;
    for (const auto& [key, ci] : means.cells) {
      double x = l.left + bar_w * static_cast<double>(i) + bar_w * 0.1;
      double h = (row_h - 20.0) * (ci.mean / y_max);
      bool dark = key.grouping == analyze::Grouping::kDiffLocation;
      bool hatched = key.category == QueryCategory::kSpecific;
      const char* fill = hatched ? (dark ? "url(#hatch-dark)"
                                         : "url(#hatch-light)")
                                 : (dark ? "#1a9641" : "#a6d96a");
      svg += "  <rect x=\"" + format_number(x) + "\" y=\"" +
             format_number(row_y + (row_h - 20.0) - h) + "\" width=\"" +
             format_number(bar_w * 0.8) + "\" height=\"" + format_number(h) +
             "\" fill=\"" + fill + "\" stroke=\"#333333\"/>\n";
      ++i;
    }
    row_y += row_h + 20.0;
  }
  svg += "</svg>\n";
  std::string svg_path = (fs::path(out_dir) / (basename + ".svg")).string();
  detail::write_text_file(svg_path, svg);
  result.files.push_back(svg_path);
  return result;
}

// ---------------------------------------------------------------------------
// Time control: per-epoch means and drift slopes.
// ---------------------------------------------------------------------------

inline EmitResult emit_time_control(const analyze::TimeControlResult& tc,
                                    const std::string& title,
                                    const std::string& out_dir,
                                    const std::string& basename) {
  if (tc.epoch_labels.empty()) throw Error("empty dataset for " + basename);
  namespace fs = std::filesystem;
  EmitResult result;

  std::string csv = "epoch_index,epoch_label,same_mean,diff_mean\n";
  for (std::size_t i = 0; i < tc.epoch_labels.size(); ++i)
    csv += std::to_string(i) + "," + tc.epoch_labels[i] + "," +
           format_number(tc.same_means[i]) + "," +
           format_number(tc.diff_means[i]) + "\n";
  csv += "# same_slope," + format_number(tc.same_slope) + "\n";
  csv += "# diff_slope," + format_number(tc.diff_slope) + "\n";
  csv += "# gap_slope," + format_number(tc.gap_slope) + "\n";
  std::string csv_path = (fs::path(out_dir) / (basename + ".csv")).string();
  detail::write_text_file(csv_path, csv);
  result.files.push_back(csv_path);

  detail::Layout l;
  double y_max = 0.0;
  for (double v : tc.same_means) y_max = std::max(y_max, v);
  for (double v : tc.diff_means) y_max = std::max(y_max, v);
  y_max = detail::nice_ceiling(y_max <= 0.0 ? 1.0 : y_max * 1.15);

  std::string svg = detail::svg_header(l, title);
  svg += detail::svg_y_axis(l, y_max, "mean D");
  double n = static_cast<double>(tc.epoch_labels.size());
  auto x_of = [&](std::size_t i) {
    return l.left + l.plot_w() * (static_cast<double>(i) + 0.5) / n;
  };
  const struct {
    const std::vector<double>* series;
    const char* color;
    const char* name;
  } lines[] = {{&tc.same_means, "#a6d96a", "same location"},
               {&tc.diff_means, "#1a9641", "diff location"}};
  for (const auto& line : lines) {
    std::string points;
    for (std::size_t i = 0; i < line.series->size(); ++i) {
      if (i) points += " ";
      points += format_number(x_of(i)) + "," +
                format_number(l.y_of((*line.series)[i], y_max));
    }
    svg += "  <polyline points=\"" + points + "\" fill=\"none\" stroke=\"" +
           line.color + "\" stroke-width=\"2\"/>\n";
    for (std::size_t i = 0; i < line.series->size(); ++i)
      svg += "  <circle cx=\"" + format_number(x_of(i)) + "\" cy=\"" +
             format_number(l.y_of((*line.series)[i], y_max)) +
             "\" r=\"3\" fill=\"" + line.color + "\"/>\n";
  }
  for (std::size_t i = 0; i < tc.epoch_labels.size(); ++i)
    svg += "  <text x=\"" + format_number(x_of(i)) + "\" y=\"" +
           format_number(l.top + l.plot_h() + 18) +
           "\" text-anchor=\"middle\" font-size=\"10\">" +
           detail::svg_escape(tc.epoch_labels[i]) + "</text>\n";
  svg += "  <text x=\"" + format_number(l.left) + "\" y=\"" +
         format_number(l.top + l.plot_h() + 40) + "\" font-size=\"10\">" +
         "slopes: same " + format_number(tc.same_slope) + ", diff " +
         format_number(tc.diff_slope) + ", gap " +
         format_number(tc.gap_slope) + "</text>\n";
  svg += "</svg>\n";
  std::string svg_path = (fs::path(out_dir) / (basename + ".svg")).string();
  detail::write_text_file(svg_path, svg);
  result.files.push_back(svg_path);
  return result;
}

}  // namespace serpaudit::report

#endif  // SERPAUDIT_REPORT_HPP
