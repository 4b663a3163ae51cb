// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Turns SERP logs into bot-pair comparison records and grouped statistics:
// same-vs-different location pairing, bootstrap cell means, the fixed
// comparison families for location/category and cross-type tests, the
// browsing-history ANOVA, and the query-length and time controls.

#ifndef SERPAUDIT_ANALYZE_HPP
#define SERPAUDIT_ANALYZE_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "serpaudit/errors.hpp"
#include "serpaudit/metrics.hpp"
#include "serpaudit/model.hpp"
#include "serpaudit/rng.hpp"
#include "serpaudit/serp_log.hpp"
#include "serpaudit/stats.hpp"

namespace serpaudit::analyze {

// ---------------------------------------------------------------------------
// Pairing.
// ---------------------------------------------------------------------------

enum class Grouping { kSameLocation, kDiffLocation };

inline std::string to_string(Grouping g) {
  return g == Grouping::kSameLocation ? "same_location" : "diff_location";
}

inline Grouping grouping_from_string(std::string_view s) {
  if (s == "same_location") return Grouping::kSameLocation;
  if (s == "diff_location") return Grouping::kDiffLocation;
  throw Error("unknown grouping '" + std::string(s) + "'");
}

struct PairingSpec {
  std::optional<Grouping> grouping;             // nullopt = both groupings
  std::optional<BotType> bot_type;              // nullopt = all types
  std::optional<QueryCategory> query_category;  // nullopt = both categories
  Metric metric = Metric::kDRbo;
  MetricConfig config;
  bool category_mode = false;
  const std::map<std::string, std::string>* category_map = nullptr;
  int max_distinct_categories = 4;
  std::optional<std::pair<int, int>> word_count_range;
  metrics::RboVariant rbo_variant = metrics::RboVariant::kExtrapolated;
};

inline void validate(const PairingSpec& spec) {
  validate(spec.config);
  if (spec.category_mode && spec.category_map == nullptr)
    throw Error("category mode requires a category map");
  if ((spec.metric == Metric::kDRboCategory) != spec.category_mode)
    throw Error("metric d_rbo_category and category_mode must agree");
  if (spec.max_distinct_categories < 1)
    throw Error("max_distinct_categories must be >= 1");
  if (spec.word_count_range &&
      (spec.word_count_range->first < 1 ||
       spec.word_count_range->second < spec.word_count_range->first))
    throw Error("word_count_range must satisfy 1 <= lo <= hi");
}

struct PairingOutcome {
  std::vector<ComparisonRecord> records;
  std::vector<std::string> notes;  // skipped queries, with reasons
};

namespace detail {

inline constexpr std::size_t kFirstPage = 10;

inline std::vector<RankedResult> top_results(const SerpRecord& r) {
  std::size_t n = std::min(kFirstPage, r.results.size());
  return std::vector<RankedResult>(r.results.begin(), r.results.begin() + n);
}

inline metrics::RankedList top_urls(const SerpRecord& r) {
  metrics::RankedList urls;
  for (const RankedResult& res : top_results(r)) urls.push_back(res.url);
  return urls;
}

inline std::string base_category(const std::string& indexed) {
  auto hash = indexed.rfind('#');
  return hash == std::string::npos ? indexed : indexed.substr(0, hash);
}

inline double metric_value(const metrics::RankedList& a,
                           const metrics::RankedList& b,
                           const PairingSpec& spec) {
  switch (spec.metric) {
    case Metric::kDRbo:
    case Metric::kDRboCategory:
      return metrics::d_metric(a, b, spec.config, spec.rbo_variant);
    case Metric::kEditDistance:
      return static_cast<double>(metrics::edit_distance(a, b));
    case Metric::kSymDiff10:
      return static_cast<double>(
          metrics::symdiff_top_k(a, b, spec.config.top_k_symdiff));
    case Metric::kCommonTop3:
      return static_cast<double>(
          metrics::common_top_k(a, b, spec.config.top_k_common));
  }
  throw Error("unhandled metric");
}

}  // namespace detail

// Emits one ComparisonRecord per unordered bot pair, query, and shared
// repetition index (records of one bot for one query are ordered by
// timestamp; the i-th fetches of two bots are compared with each other).
// All metrics see first-page (top-10) lists only. In category mode a
// query is dropped entirely when any eligible SERP shows more than
// max_distinct_categories distinct categories.
inline PairingOutcome make_pairs(const std::vector<SerpRecord>& log,
                                 const PairingSpec& spec) {
  validate(spec);
  using QueryKey = std::tuple<std::string, std::string, std::string>;
  std::map<QueryKey, std::map<std::string, std::vector<const SerpRecord*>>>
      by_query;
  std::map<QueryKey, Query> query_of;
  for (const SerpRecord& r : log) {
    if (r.status != FetchStatus::kOk) continue;
    if (spec.bot_type && r.bot_type != *spec.bot_type) continue;
    if (spec.query_category && r.query.category != *spec.query_category)
      continue;
    if (spec.word_count_range &&
        (r.query.word_count < spec.word_count_range->first ||
         r.query.word_count > spec.word_count_range->second))
      continue;
    QueryKey key{r.audit_id, r.engine, r.query.text};
    by_query[key][r.bot_id].push_back(&r);
    query_of.try_emplace(key, r.query);
  }

  PairingOutcome out;
  for (auto& [key, by_bot] : by_query) {
    const auto& [audit_id, engine, query_text] = key;
    if (by_bot.size() < 2) {
      out.notes.push_back("skipped (fewer than 2 eligible bots): " + engine +
                          " / " + query_text);
      continue;
    }
    for (auto& [bot, records] : by_bot)
      std::sort(records.begin(), records.end(),
                [](const SerpRecord* a, const SerpRecord* b) {
                  return a->timestamp_ms < b->timestamp_ms;
                });

    std::map<const SerpRecord*, metrics::RankedList> lists;
    bool too_many_categories = false;
    for (const auto& [bot, records] : by_bot) {
      for (const SerpRecord* r : records) {
        metrics::RankedList list;
        if (spec.category_mode) {
          list = metrics::to_category_sequence(detail::top_results(*r),
                                               *spec.category_map);
          std::set<std::string> distinct;
          for (const std::string& entry : list)
            distinct.insert(detail::base_category(entry));
          if (static_cast<int>(distinct.size()) >
              spec.max_distinct_categories)
            too_many_categories = true;
        } else {
          list = detail::top_urls(*r);
        }
        lists.emplace(r, std::move(list));
      }
    }
    if (too_many_categories) {
      out.notes.push_back("dropped (exceeds max distinct categories): " +
                          engine + " / " + query_text);
      continue;
    }

    for (auto a = by_bot.begin(); a != by_bot.end(); ++a) {
      for (auto b = std::next(a); b != by_bot.end(); ++b) {
        bool same_loc = a->second.front()->location ==
                        b->second.front()->location;
        Grouping g = same_loc ? Grouping::kSameLocation
                              : Grouping::kDiffLocation;
        if (spec.grouping && g != *spec.grouping) continue;
        std::size_t reps = std::min(a->second.size(), b->second.size());
        for (std::size_t rep = 0; rep < reps; ++rep) {
          ComparisonRecord c;
          c.audit_id = audit_id;
          c.engine = engine;
          c.query = query_of.at(key);
          c.bot_a = a->first;
          c.bot_b = b->first;
          c.same_location = same_loc;
          c.metric = spec.metric;
          c.value = detail::metric_value(lists.at(a->second[rep]),
                                         lists.at(b->second[rep]), spec);
          validate(c);
          out.records.push_back(std::move(c));
        }
      }
    }
  }
  return out;
}

// Expected pair counts for one (engine, query) wave given bots-per-location
// tallies: SameLocation = sum of C(n,2), DiffLocation = cross products.
inline std::pair<std::size_t, std::size_t> expected_pair_counts(
    const std::vector<std::size_t>& bots_per_location) {
  std::size_t same = 0, diff = 0;
  for (std::size_t i = 0; i < bots_per_location.size(); ++i) {
    same += bots_per_location[i] * (bots_per_location[i] - 1) / 2;
    for (std::size_t j = i + 1; j < bots_per_location.size(); ++j)
      diff += bots_per_location[i] * bots_per_location[j];
  }
  return {same, diff};
}

// ---------------------------------------------------------------------------
// Comparison / statistic line formats (one JSON object per line, "v":1).
// ---------------------------------------------------------------------------

inline constexpr int kComparisonLogVersion = 1;

inline std::string serialize_comparison(const ComparisonRecord& c) {
  validate(c);
  nlohmann::ordered_json j;
  j["v"] = kComparisonLogVersion;
  j["audit_id"] = c.audit_id;
  j["engine"] = c.engine;
  j["query_text"] = c.query.text;
  j["query_category"] = to_string(c.query.category);
  j["bot_a"] = c.bot_a;
  j["bot_b"] = c.bot_b;
  j["same_location"] = c.same_location;
  j["metric"] = to_string(c.metric);
  j["value"] = c.value;
  return j.dump();
}

inline ComparisonRecord parse_comparison(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError("comparison line is not a JSON object");
  if (!j.contains("v") || !j["v"].is_number_integer())
    throw VersionError("comparison line missing version field");
  if (j["v"].get<int>() != kComparisonLogVersion)
    throw VersionError("unsupported comparison line version " +
                       j["v"].dump());
  serpaudit::detail::require_field(j, "value");
  ComparisonRecord c;
  c.audit_id = serpaudit::detail::require_string(j, "audit_id");
  c.engine = serpaudit::detail::require_string(j, "engine");
  c.query = make_query(
      serpaudit::detail::require_string(j, "query_text"),
      query_category_from_string(
          serpaudit::detail::require_string(j, "query_category")));
  c.bot_a = serpaudit::detail::require_string(j, "bot_a");
  c.bot_b = serpaudit::detail::require_string(j, "bot_b");
  if (!j["same_location"].is_boolean())
    throw ParseError("same_location must be boolean");
  c.same_location = j["same_location"].get<bool>();
  c.metric = metric_from_string(serpaudit::detail::require_string(j, "metric"));
  if (!j["value"].is_number()) throw ParseError("value must be a number");
  c.value = j["value"].get<double>();
  validate(c);
  return c;
}

inline std::size_t write_comparison_log(
    const std::vector<ComparisonRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write comparison log: " + path);
  for (const ComparisonRecord& c : records) out << serialize_comparison(c)
                                                << '\n';
  if (!out) throw Error("write failure: " + path);
  return records.size();
}

inline std::vector<ComparisonRecord> read_comparison_log(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open comparison log: " + path);
  std::vector<ComparisonRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (in.eof()) throw ParseError("truncated final line", line_no);
    try {
      out.push_back(parse_comparison(line));
    } catch (const VersionError&) {
      throw;
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()), line_no);
    }
  }
  return out;
}

inline std::string serialize_stat_result(const stats::StatResult& r) {
  nlohmann::ordered_json j;
  j["v"] = 1;
  j["test"] = r.test == stats::TestKind::kMannWhitneyU ? "mann_whitney_u"
                                                       : "anova_f";
  j["group_labels"] = r.group_labels;
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["family_size"] = r.family_size;
  j["p_adjusted"] = r.p_adjusted;
  j["stars"] = stats::to_string(r.stars);
  j["degenerate"] = r.degenerate;
  j["infinite_f"] = r.infinite_f;
  return j.dump();
}

inline std::size_t write_stat_results(
    const std::vector<stats::StatResult>& results, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write stat results: " + path);
  for (const stats::StatResult& r : results)
    out << serialize_stat_result(r) << '\n';
  if (!out) throw Error("write failure: " + path);
  return results.size();
}

// ---------------------------------------------------------------------------
// Grouped means with bootstrap confidence intervals.
// ---------------------------------------------------------------------------

struct CellKey {
  std::string engine;
  Grouping grouping = Grouping::kSameLocation;
  QueryCategory category = QueryCategory::kGeneral;

  bool operator<(const CellKey& o) const {
    return std::tie(engine, grouping, category) <
           std::tie(o.engine, o.grouping, o.category);
  }
};

struct GroupMeansResult {
  std::map<CellKey, stats::BootstrapCI> cells;
  std::vector<std::string> notes;  // empty cells in the observed grid
};

// One bootstrap CI per (engine, grouping, query category) cell. Cell seeds
// are forked from the root seed by cell name, so cell results do not
// depend on which other cells exist.
inline GroupMeansResult group_means(const std::vector<ComparisonRecord>& records,
                                    std::uint64_t seed, int resamples = 10000,
                                    double level = 0.95, int workers = 1) {
  std::map<CellKey, std::vector<double>> values;
  std::set<std::string> engines;
  for (const ComparisonRecord& r : records) {
    engines.insert(r.engine);
    CellKey key{r.engine,
                r.same_location ? Grouping::kSameLocation
                                : Grouping::kDiffLocation,
                r.query.category};
    values[key].push_back(r.value);
  }
  GroupMeansResult out;
  rng::Stream root(seed);
  for (const std::string& engine : engines) {
    for (Grouping g : {Grouping::kSameLocation, Grouping::kDiffLocation}) {
      for (QueryCategory c :
           {QueryCategory::kGeneral, QueryCategory::kSpecific}) {
        CellKey key{engine, g, c};
        auto it = values.find(key);
        if (it == values.end()) {
          out.notes.push_back("cell omitted (no records): " + engine + "/" +
                              to_string(g) + "/" + to_string(c));
          continue;
        }
        std::uint64_t cell_seed =
            root.fork(engine).fork(to_string(g)).fork(to_string(c)).next();
        out.cells[key] = stats::bootstrap_ci(it->second, resamples, level,
                                             cell_seed, workers);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixed comparison families.
// ---------------------------------------------------------------------------

struct TestSuiteResult {
  std::vector<stats::StatResult> results;
  std::vector<std::string> untestable;  // missing cells, family unchanged
};

namespace detail {

using CellValues =
    std::map<std::string,
             std::map<Grouping, std::map<QueryCategory, std::vector<double>>>>;

inline CellValues cell_values(const std::vector<ComparisonRecord>& records) {
  CellValues out;
  for (const ComparisonRecord& r : records)
    out[r.engine][r.same_location ? Grouping::kSameLocation
                                  : Grouping::kDiffLocation][r.query.category]
        .push_back(r.value);
  return out;
}

inline std::string cell_label(const std::string& engine, Grouping g,
                              QueryCategory c) {
  return engine + "/" + to_string(g) + "/" + to_string(c);
}

}  // namespace detail

// The four per-engine comparisons of the location/category family:
// Same-vs-Diff within each query category and General-vs-Specific within
// each grouping. Family size stays fixed (default 12: four comparisons
// across three engines) no matter how many cells are testable.
inline TestSuiteResult run_figure2_tests(
    const std::vector<ComparisonRecord>& records, int family_size = 12) {
  auto cells = detail::cell_values(records);
  TestSuiteResult out;
  for (const auto& [engine, by_grouping] : cells) {
    auto values = [&](Grouping g, QueryCategory c)
        -> const std::vector<double>* {
      auto git = by_grouping.find(g);
      if (git == by_grouping.end()) return nullptr;
      auto cit = git->second.find(c);
      return cit == git->second.end() ? nullptr : &cit->second;
    };
    struct Comparison {
      Grouping ga;
      QueryCategory ca;
      Grouping gb;
      QueryCategory cb;
    };
    const Comparison comparisons[] = {
        {Grouping::kSameLocation, QueryCategory::kGeneral,
         Grouping::kDiffLocation, QueryCategory::kGeneral},
        {Grouping::kSameLocation, QueryCategory::kSpecific,
         Grouping::kDiffLocation, QueryCategory::kSpecific},
        {Grouping::kSameLocation, QueryCategory::kGeneral,
         Grouping::kSameLocation, QueryCategory::kSpecific},
        {Grouping::kDiffLocation, QueryCategory::kGeneral,
         Grouping::kDiffLocation, QueryCategory::kSpecific},
    };
    for (const Comparison& cmp : comparisons) {
      const std::vector<double>* a = values(cmp.ga, cmp.ca);
      const std::vector<double>* b = values(cmp.gb, cmp.cb);
      std::string label_a = detail::cell_label(engine, cmp.ga, cmp.ca);
      std::string label_b = detail::cell_label(engine, cmp.gb, cmp.cb);
      if (a == nullptr || b == nullptr) {
        out.untestable.push_back("untestable (empty cell): " + label_a +
                                 " vs " + label_b);
        continue;
      }
      stats::StatResult r = stats::mann_whitney_u(*a, *b);
      r.group_labels = {label_a, label_b};
      out.results.push_back(std::move(r));
    }
  }
  out.results = stats::bonferroni(std::move(out.results), family_size);
  return out;
}

// The cross-type family: for every engine, query category, and grouping,
// compare the D values of each profile-type pair on the shared query
// subset. Six comparisons per (engine, category); family defaults to 36.
inline TestSuiteResult run_cross_type_tests(
    const std::map<BotType, std::vector<ComparisonRecord>>& records_by_type,
    int family_size = 36) {
  std::map<BotType, detail::CellValues> cells;
  std::set<std::string> engines;
  for (const auto& [type, records] : records_by_type) {
    cells[type] = detail::cell_values(records);
    for (const auto& kv : cells[type]) engines.insert(kv.first);
  }
  const std::pair<BotType, BotType> type_pairs[] = {
      {BotType::kType1, BotType::kType2},
      {BotType::kType1, BotType::kType3},
      {BotType::kType2, BotType::kType3},
  };
  TestSuiteResult out;
  for (const std::string& engine : engines) {
    for (QueryCategory c :
         {QueryCategory::kGeneral, QueryCategory::kSpecific}) {
      for (Grouping g : {Grouping::kSameLocation, Grouping::kDiffLocation}) {
        for (auto [ta, tb] : type_pairs) {
          auto values = [&](BotType t) -> const std::vector<double>* {
            auto tit = cells.find(t);
            if (tit == cells.end()) return nullptr;
            auto eit = tit->second.find(engine);
            if (eit == tit->second.end()) return nullptr;
            auto git = eit->second.find(g);
            if (git == eit->second.end()) return nullptr;
            auto cit = git->second.find(c);
            return cit == git->second.end() ? nullptr : &cit->second;
          };
          const std::vector<double>* a = values(ta);
          const std::vector<double>* b = values(tb);
          std::string label_a = detail::cell_label(engine, g, c) + "/" +
                                to_string(ta);
          std::string label_b = detail::cell_label(engine, g, c) + "/" +
                                to_string(tb);
          if (a == nullptr || b == nullptr) {
            out.untestable.push_back("untestable (empty cell): " + label_a +
                                     " vs " + label_b);
            continue;
          }
          stats::StatResult r = stats::mann_whitney_u(*a, *b);
          r.group_labels = {label_a, label_b};
          out.results.push_back(std::move(r));
        }
      }
    }
  }
  out.results = stats::bonferroni(std::move(out.results), family_size);
  return out;
}

// One-way ANOVA per (engine, query category) over three pair groups built
// from the bots' history kinds: conflict-vs-stateless, general-vs-stateless
// and stateless-vs-stateless D values. Any missing group is an error.
inline std::vector<stats::StatResult> run_history_anova(
    const std::vector<ComparisonRecord>& records,
    const std::map<std::string, HistoryKind>& history_of_bot) {
  auto history = [&](const std::string& bot) {
    auto it = history_of_bot.find(bot);
    if (it == history_of_bot.end())
      throw Error("no history kind known for bot '" + bot + "'");
    return it->second;
  };
  struct Key {
    std::string engine;
    QueryCategory category;
    bool operator<(const Key& o) const {
      return std::tie(engine, category) < std::tie(o.engine, o.category);
    }
  };
  constexpr int kConflict = 0, kGeneral = 1, kStateless = 2;
  std::map<Key, std::array<std::vector<double>, 3>> groups;
  for (const ComparisonRecord& r : records) {
    HistoryKind a = history(r.bot_a);
    HistoryKind b = history(r.bot_b);
    auto is_pair = [&](HistoryKind x, HistoryKind y) {
      return (a == x && b == y) || (a == y && b == x);
    };
    int slot = -1;
    if (is_pair(HistoryKind::kConflictNews, HistoryKind::kStateless))
      slot = kConflict;
    else if (is_pair(HistoryKind::kGeneralNews, HistoryKind::kStateless))
      slot = kGeneral;
    else if (a == HistoryKind::kStateless && b == HistoryKind::kStateless)
      slot = kStateless;
    if (slot < 0) continue;
    groups[Key{r.engine, r.query.category}][static_cast<std::size_t>(slot)]
        .push_back(r.value);
  }
  const char* group_names[] = {"conflict_vs_stateless", "general_vs_stateless",
                               "stateless_vs_stateless"};
  std::vector<stats::StatResult> out;
  for (const auto& [key, by_group] : groups) {
    std::vector<std::vector<double>> data;
    std::vector<std::string> labels;
    for (int i = 0; i < 3; ++i) {
      if (by_group[static_cast<std::size_t>(i)].size() < 2)
        throw Error("history group missing or too small: " + key.engine +
                    "/" + to_string(key.category) + "/" + group_names[i]);
      data.push_back(by_group[static_cast<std::size_t>(i)]);
      labels.push_back(key.engine + "/" + to_string(key.category) + "/" +
                       group_names[i]);
    }
    stats::StatResult r = stats::anova_oneway(data, labels);
    stats::finalize(r);
    out.push_back(std::move(r));
  }
  if (out.empty()) throw Error("no history comparison groups found");
  return out;
}

// ---------------------------------------------------------------------------
// Controls.
// ---------------------------------------------------------------------------

// Restricts to queries of lo..hi words, then equalizes the number of
// distinct queries per category within each engine by seeded subsampling,
// and reports group means. The filter applying to nothing is an error.
inline GroupMeansResult length_control(
    const std::vector<ComparisonRecord>& records, int lo = 3, int hi = 8,
    std::uint64_t seed = 0, int resamples = 10000) {
  if (lo < 1 || hi < lo) throw Error("length bounds must satisfy 1<=lo<=hi");
  std::vector<ComparisonRecord> in_range;
  for (const ComparisonRecord& r : records)
    if (r.query.word_count >= lo && r.query.word_count <= hi)
      in_range.push_back(r);
  if (in_range.empty())
    throw Error("no comparison records with query length in [" +
                std::to_string(lo) + ", " + std::to_string(hi) + "]");

  // Distinct queries per (engine, category).
  std::map<std::string, std::array<std::set<std::string>, 2>> queries;
  for (const ComparisonRecord& r : in_range)
    queries[r.engine][r.query.category == QueryCategory::kGeneral ? 0 : 1]
        .insert(r.query.text);

  rng::Stream root(seed);
  std::map<std::string, std::set<std::string>> keep;  // engine -> query texts
  for (const auto& [engine, by_cat] : queries) {
    std::size_t target = std::min(by_cat[0].size(), by_cat[1].size());
    if (target == 0)
      throw Error("length control leaves engine '" + engine +
                  "' without both query categories");
    const char* cat_names[] = {"general", "specific"};
    for (int c = 0; c < 2; ++c) {
      std::vector<std::string> sorted(by_cat[static_cast<std::size_t>(c)].begin(),
                                      by_cat[static_cast<std::size_t>(c)].end());
      rng::Stream s = root.fork("length").fork(engine).fork(cat_names[c]);
      for (std::size_t idx : s.sample_indices(sorted.size(), target))
        keep[engine].insert(sorted[idx]);
    }
  }

  std::vector<ComparisonRecord> balanced;
  for (const ComparisonRecord& r : in_range)
    if (keep[r.engine].count(r.query.text)) balanced.push_back(r);
  return group_means(balanced, seed, resamples);
}

struct TimeControlResult {
  std::vector<std::string> epoch_labels;
  std::vector<double> same_means;
  std::vector<double> diff_means;
  double same_slope = 0.0;  // least-squares slope over epoch index
  double diff_slope = 0.0;
  double gap_slope = 0.0;   // slope of (diff - same)
};

namespace detail {

inline double slope(const std::vector<double>& y) {
  double n = static_cast<double>(y.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double x = static_cast<double>(i);
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  double denom = n * sxx - sx * sx;
  return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

}  // namespace detail

// Same-plan logs captured at different times: per-epoch mean D for the two
// groupings plus least-squares drift slopes. Epochs must cover identical
// (engine, bot, query) sets.
inline TimeControlResult time_control(
    const std::vector<std::pair<std::string, std::vector<SerpRecord>>>&
        epochs,
    const PairingSpec& spec) {
  if (epochs.size() < 2) throw Error("time control needs at least 2 epochs");
  std::set<std::tuple<std::string, std::string, std::string>> plan;
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    std::set<std::tuple<std::string, std::string, std::string>> this_plan;
    for (const SerpRecord& r : epochs[e].second)
      this_plan.insert({r.engine, r.bot_id, r.query.text});
    if (e == 0)
      plan = std::move(this_plan);
    else if (this_plan != plan)
      throw Error("epoch '" + epochs[e].first +
                  "' does not match the first epoch's plan");
  }
  TimeControlResult out;
  for (const auto& [label, log] : epochs) {
    PairingSpec epoch_spec = spec;
    epoch_spec.grouping.reset();
    PairingOutcome pairs = make_pairs(log, epoch_spec);
    std::vector<double> same, diff;
    for (const ComparisonRecord& r : pairs.records)
      (r.same_location ? same : diff).push_back(r.value);
    if (same.empty() || diff.empty())
      throw Error("epoch '" + label + "' lacks a grouping");
    out.epoch_labels.push_back(label);
    out.same_means.push_back(stats::mean_of(same));
    out.diff_means.push_back(stats::mean_of(diff));
  }
  out.same_slope = detail::slope(out.same_means);
  out.diff_slope = detail::slope(out.diff_means);
  std::vector<double> gap;
  for (std::size_t i = 0; i < out.same_means.size(); ++i)
    gap.push_back(out.diff_means[i] - out.same_means[i]);
  out.gap_slope = detail::slope(gap);
  return out;
}

}  // namespace serpaudit::analyze

#endif  // SERPAUDIT_ANALYZE_HPP
