// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// End-to-end simulator scenarios: shared pipeline runners (audit -> success
// filter -> balance -> pairs -> statistics) against in-process simulated
// engines with known injected personalization, plus the validation suite
// built from them. Everything here is deterministic in the scenario seed.

#ifndef SERPAUDIT_SCENARIOS_HPP
#define SERPAUDIT_SCENARIOS_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "serpaudit/analyze.hpp"
#include "serpaudit/annotate.hpp"
#include "serpaudit/crawler.hpp"
#include "serpaudit/engine_client.hpp"
#include "serpaudit/errors.hpp"
#include "serpaudit/query_corpus.hpp"
#include "serpaudit/report.hpp"
#include "serpaudit/rng.hpp"
#include "serpaudit/simengine.hpp"

namespace serpaudit::scenarios {

struct ScenarioConfig {
  std::uint64_t seed = 7;
  std::vector<std::string> engines = {"simA"};
  sim::EnginePersona persona;  // name and seed are set per engine
  sim::CorpusConfig corpus;
  std::vector<std::string> locations = {"IL", "SA", "BR", "US-NY"};
  BotType bot_type = BotType::kType2;
  int bots_per_location = 3;  // >= success-filter IP threshold
  // Query slice: first N per category from the built-in corpus (0 = all),
  // optionally restricted to the shared cross-type subset.
  int queries_per_category = 5;
  bool type3_subset_only = false;
  int repeat_count = 1;
  int resamples = 2000;
};

inline std::vector<Query> scenario_queries(const ScenarioConfig& cfg) {
  std::vector<Query> out;
  int general = 0, specific = 0;
  for (const Query& q : builtin_query_corpus()) {
    if (cfg.type3_subset_only && !q.in_type3_subset) continue;
    int& count = q.category == QueryCategory::kGeneral ? general : specific;
    if (cfg.queries_per_category > 0 && count >= cfg.queries_per_category)
      continue;
    ++count;
    out.push_back(q);
  }
  if (out.empty()) throw Error("scenario query slice is empty");
  return out;
}

// One simulated engine per configured engine name; identical corpora,
// independent per-engine ranking seeds.
inline std::vector<std::unique_ptr<sim::SimEngine>> scenario_engines(
    const ScenarioConfig& cfg, const std::vector<Query>& queries) {
  std::vector<std::unique_ptr<sim::SimEngine>> engines;
  for (const std::string& name : cfg.engines) {
    sim::EnginePersona persona = cfg.persona;
    persona.name = name;
    persona.seed = rng::Stream(cfg.seed).fork("engine").fork(name).next();
    engines.push_back(std::make_unique<sim::SimEngine>(
        std::move(persona), queries, cfg.corpus));
  }
  return engines;
}

struct PipelineArtifacts {
  std::vector<BotProfile> roster;
  std::vector<Query> queries;
  std::string log_path;
  std::vector<SerpRecord> audited;
  std::vector<SerpRecord> filtered;
  std::vector<SerpRecord> balanced;
  std::vector<crawl::Exclusion> exclusions;
  analyze::PairingOutcome pairs;  // DRbo, both groupings, all types
  analyze::GroupMeansResult means;
  analyze::TestSuiteResult fig2;
  std::vector<std::string> engine_outages;
};

namespace detail {

inline crawl::AuditPlan scenario_plan(const ScenarioConfig& cfg,
                                      const std::vector<Query>& queries,
                                      std::vector<BotProfile> roster) {
  crawl::AuditPlan plan;
  plan.audit_id = "sim-" + std::to_string(cfg.seed);
  plan.engines = cfg.engines;
  plan.queries = queries;
  plan.profiles = std::move(roster);
  plan.repeat_count = cfg.repeat_count;
  plan.jitter_seed = rng::Stream(cfg.seed).fork("jitter").next();
  return plan;
}

inline PipelineArtifacts finish_pipeline(const ScenarioConfig& cfg,
                                         crawl::AuditPlan plan,
                                         const std::string& scratch_dir,
                                         const std::string& log_name) {
  std::vector<Query> queries = plan.queries;
  std::vector<std::unique_ptr<sim::SimEngine>> engines =
      scenario_engines(cfg, queries);
  std::vector<std::unique_ptr<crawl::InProcessSimClient>> clients;
  std::vector<crawl::EngineClient*> client_ptrs;
  for (std::size_t i = 0; i < engines.size(); ++i) {
    clients.push_back(std::make_unique<crawl::InProcessSimClient>(
        *engines[i], cfg.engines[i]));
    client_ptrs.push_back(clients.back().get());
  }

  std::filesystem::create_directories(scratch_dir);
  PipelineArtifacts out;
  out.roster = plan.profiles;
  out.queries = queries;
  out.log_path =
      (std::filesystem::path(scratch_dir) / (log_name + ".ndjson")).string();
  std::filesystem::remove(out.log_path);

  crawl::SimClock clock;
  crawl::AuditOutcome outcome =
      crawl::run_audit(plan, client_ptrs, out.log_path, clock);
  out.engine_outages = outcome.engine_outages;
  out.audited = read_serp_log(out.log_path);

  crawl::SuccessFilterOutput filtered = crawl::success_filter(
      out.audited, crawl::ip_labels_of(out.roster));
  out.filtered = std::move(filtered.kept);
  out.exclusions = std::move(filtered.report);
  out.balanced = crawl::balance(out.filtered,
                                rng::Stream(cfg.seed).fork("balance").next());

  analyze::PairingSpec spec;
  out.pairs = analyze::make_pairs(out.balanced, spec);
  out.means = analyze::group_means(out.pairs.records,
                                   rng::Stream(cfg.seed).fork("means").next(),
                                   cfg.resamples);
  out.fig2 = analyze::run_figure2_tests(out.pairs.records);
  return out;
}

}  // namespace detail

// Single-type pipeline (the location / query-category experiments).
inline PipelineArtifacts run_pipeline(const ScenarioConfig& cfg,
                                      const std::string& scratch_dir,
                                      const std::string& log_name = "audit") {
  std::vector<Query> queries = scenario_queries(cfg);
  crawl::RosterSpec roster_spec;
  roster_spec.bot_type = cfg.bot_type;
  roster_spec.locations = cfg.locations;
  roster_spec.per_location = cfg.bots_per_location;
  return detail::finish_pipeline(
      cfg, detail::scenario_plan(cfg, queries, crawl::make_roster(roster_spec)),
      scratch_dir, log_name);
}

inline double mean_value(const std::vector<ComparisonRecord>& records,
                         bool same_location) {
  std::vector<double> vals;
  for (const ComparisonRecord& r : records)
    if (r.same_location == same_location) vals.push_back(r.value);
  if (vals.empty()) throw Error("no records in grouping");
  return stats::mean_of(vals);
}

// ---------------------------------------------------------------------------
// Cross-type / history scenario.
// ---------------------------------------------------------------------------

struct CrossTypeArtifacts {
  PipelineArtifacts base;
  std::map<BotType, std::vector<ComparisonRecord>> pairs_by_type;
  analyze::TestSuiteResult cross_type;
  std::vector<stats::StatResult> history_anova;
  std::map<std::string, HistoryKind> history_of_bot;
};

// Builds a mixed Type1/Type2/Type3 roster on the shared query subset,
// warms up the stateful Type-3 bots against the first engine's tracker
// endpoints, audits everything in one plan, and runs the cross-type and
// history suites.
inline CrossTypeArtifacts run_cross_type_pipeline(
    const ScenarioConfig& cfg, const std::string& scratch_dir,
    int type3_conflict = 2, int type3_general = 2, int type3_stateless = 2) {
  ScenarioConfig subset_cfg = cfg;
  subset_cfg.type3_subset_only = true;
  std::vector<Query> queries = scenario_queries(subset_cfg);

  crawl::RosterSpec t1;
  t1.bot_type = BotType::kType1;
  t1.locations = cfg.locations;
  t1.per_location = cfg.bots_per_location;
  crawl::RosterSpec t2 = t1;
  t2.bot_type = BotType::kType2;
  crawl::RosterSpec t3 = t1;
  t3.bot_type = BotType::kType3;
  t3.conflict_bots = type3_conflict;
  t3.general_bots = type3_general;
  t3.stateless_bots = type3_stateless;

  std::vector<BotProfile> roster = crawl::make_roster(t1);
  for (const crawl::RosterSpec* part : {&t2, &t3})
    for (BotProfile& b : crawl::make_roster(*part))
      roster.push_back(std::move(b));

  // Warm-up: visit tracker URLs so topic cookies land in the jar. The
  // cookie names carry the topic kind; any engine's tracker works.
  std::vector<std::unique_ptr<sim::SimEngine>> engines =
      scenario_engines(subset_cfg, queries);
  crawl::InProcessSimFetcher fetcher(*engines.front());
  auto track_urls = [&](const std::string& kind) {
    std::vector<std::string> urls;
    for (int i = 0; i < 24; ++i)
      urls.push_back("http://tracker.sim/track/" + kind + "/article-" +
                     std::to_string(i));
    return urls;
  };
  std::vector<std::string> conflict_urls = track_urls("conflict");
  std::vector<std::string> general_urls = track_urls("general");
  for (BotProfile& b : roster) {
    if (b.history_kind == HistoryKind::kStateless) continue;
    const std::vector<std::string>& urls =
        b.history_kind == HistoryKind::kConflictNews ? conflict_urls
                                                     : general_urls;
    b = crawl::build_history_from_urls(
            b, urls, 12, rng::Stream(cfg.seed).fork("warmup").next(), fetcher)
            .profile;
  }

  CrossTypeArtifacts out;
  for (const BotProfile& b : roster)
    out.history_of_bot[b.bot_id] = b.history_kind;
  out.base = detail::finish_pipeline(
      subset_cfg, detail::scenario_plan(subset_cfg, queries, std::move(roster)),
      scratch_dir, "audit-crosstype");

  for (BotType t : {BotType::kType1, BotType::kType2, BotType::kType3}) {
    analyze::PairingSpec spec;
    spec.bot_type = t;
    out.pairs_by_type[t] =
        analyze::make_pairs(out.base.balanced, spec).records;
  }
  out.cross_type = analyze::run_cross_type_tests(out.pairs_by_type);

  analyze::PairingSpec t3_spec;
  t3_spec.bot_type = BotType::kType3;
  out.history_anova = analyze::run_history_anova(
      analyze::make_pairs(out.base.balanced, t3_spec).records,
      out.history_of_bot);
  return out;
}

// ---------------------------------------------------------------------------
// Leaning scenario.
// ---------------------------------------------------------------------------

struct LeaningArtifacts {
  PipelineArtifacts base;
  annotate::CategoryMap categories;
  std::vector<annotate::LeaningLabel> labels;  // two agreeing human coders
  std::map<std::string, std::optional<vocab::Leaning>> resolved;
  annotate::LeaningPanel all;
  annotate::LeaningPanel top3;
};

// Location-personalized ranking over a small per-query pool with the
// pro-Israel leaning skew tied to IL affinity: IL top ranks then
// over-sample pro-Israel News documents relative to full first pages.
// Human labels are synthesized from simulator ground truth (two coders in
// exact agreement per URL).
inline LeaningArtifacts run_leaning_pipeline(const ScenarioConfig& base_cfg,
                                             const std::string& scratch_dir) {
  ScenarioConfig cfg = base_cfg;
  cfg.persona.w_loc = 3.0;  // ranking dominated by location affinity
  cfg.corpus.docs_per_query = 12;  // steep affinity drop-off across ranks
  cfg.corpus.leaning_affinity_skew = 0.7;
  cfg.queries_per_category = std::max(cfg.queries_per_category, 8);

  LeaningArtifacts out;
  out.base = run_pipeline(cfg, scratch_dir, "audit-leaning");

  // Category map over every domain seen, via the offline annotator.
  std::set<std::string> domain_set;
  for (const SerpRecord& r : out.base.balanced)
    for (const RankedResult& res : r.results) domain_set.insert(res.domain);
  annotate::StubAnnotator annotator;
  out.categories = annotate::categorize_domains(
      std::vector<std::string>(domain_set.begin(), domain_set.end()),
      annotator,
      (std::filesystem::path(scratch_dir) / "category-cache").string());
  std::map<std::string, std::string> catmap =
      annotate::plain_category_map(out.categories);

  // Ground-truth leanings for every News URL, voiced by two agreeing
  // coders.
  std::vector<Query> queries = out.base.queries;
  std::vector<std::unique_ptr<sim::SimEngine>> engines =
      scenario_engines(cfg, queries);
  std::map<std::string, const sim::SimEngine*> engine_of;
  for (std::size_t i = 0; i < engines.size(); ++i)
    engine_of[cfg.engines[i]] = engines[i].get();
  std::set<std::string> labeled;
  for (const SerpRecord& r : out.base.balanced) {
    for (const RankedResult& res : r.results) {
      auto cat = catmap.find(res.domain);
      if (cat == catmap.end() || cat->second != "News") continue;
      if (!labeled.insert(res.url).second) continue;
      std::string doc_id = res.url.substr(res.url.rfind('/') + 1);
      auto truth = engine_of.at(r.engine)->truth(doc_id);
      if (!truth || !truth->has_leaning) continue;
      for (const char* coder : {"coder-1", "coder-2"}) {
        annotate::LeaningLabel l;
        l.url = res.url;
        l.coder_id = std::string(coder) + "@" + r.engine;
        l.coder_kind = annotate::CoderKind::kHuman;
        l.label = truth->leaning;
        l.survey_id = "sim-survey";
        out.labels.push_back(std::move(l));
      }
    }
  }
  out.resolved = annotate::consensus(out.labels);
  out.all = annotate::leaning_proportions(out.base.balanced, out.resolved,
                                          catmap, annotate::Scope::kAll);
  out.top3 = annotate::leaning_proportions(out.base.balanced, out.resolved,
                                           catmap, annotate::Scope::kTop3);
  return out;
}

inline double pro_israel_share(const annotate::LeaningPanel& panel,
                               const std::string& location) {
  double total_weight = 0.0, share = 0.0;
  for (const annotate::LeaningCell& cell : panel.cells) {
    if (cell.location != location) continue;
    double w = static_cast<double>(cell.denominator);
    share += w * cell.proportions[static_cast<std::size_t>(
                     vocab::leaning_index(vocab::Leaning::kProIsrael))];
    total_weight += w;
  }
  if (total_weight == 0.0)
    throw Error("no leaning cells for location " + location);
  return share / total_weight;
}

// ---------------------------------------------------------------------------
// Validation suite (the `validate e2e` command).
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

inline bool any_significant(const analyze::TestSuiteResult& suite,
                            double alpha = 0.05) {
  for (const stats::StatResult& r : suite.results)
    if (r.p_adjusted < alpha) return true;
  return false;
}

}  // namespace detail

// Deterministic end-to-end checks over the simulator. Small enough to run
// in seconds; the numbered thresholds are the shared acceptance bars.
inline std::vector<CheckResult> run_validation_suite(
    std::uint64_t seed, const std::string& scratch_dir) {
  std::vector<CheckResult> checks;
  auto add = [&](std::string name, bool pass, std::string detail) {
    checks.push_back(CheckResult{std::move(name), pass, std::move(detail)});
  };

  {  // 1. Null fidelity: no injected signal, no measured difference.
    ScenarioConfig cfg;
    cfg.seed = seed;
    PipelineArtifacts a = run_pipeline(cfg, scratch_dir, "audit-null");
    bool all_zero = true;
    for (const ComparisonRecord& r : a.pairs.records)
      if (r.value != 0.0) all_zero = false;
    bool none_significant = !detail::any_significant(a.fig2);
    add("null_fidelity", all_zero && none_significant,
        all_zero ? "all D values 0" : "nonzero D under zero weights");
  }

  double gap = 0.0;
  {  // 2. Location detection: w_loc=1 separates the groupings.
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.persona.w_loc = 1.0;
    PipelineArtifacts a = run_pipeline(cfg, scratch_dir, "audit-loc");
    double same = mean_value(a.pairs.records, true);
    double diff = mean_value(a.pairs.records, false);
    gap = diff - same;
    bool significant = false;
    for (const stats::StatResult& r : a.fig2.results)
      if (r.group_labels.size() == 2 &&
          r.group_labels[0].find("same_location") != std::string::npos &&
          r.group_labels[1].find("diff_location") != std::string::npos &&
          r.p_adjusted < 0.01)
        significant = true;
    add("location_detection", gap > 0.2 && significant,
        "diff-same gap " + report::format_number(gap));
  }

  {  // 3. Monotone response to the location weight.
    std::vector<double> means;
    for (double w : {0.0, 0.25, 0.5, 1.0}) {
      ScenarioConfig cfg;
      cfg.seed = seed;
      cfg.persona.w_loc = w;
      cfg.queries_per_category = 3;
      cfg.bots_per_location = 3;
      cfg.locations = {"IL", "SA"};
      cfg.resamples = 200;
      PipelineArtifacts a = run_pipeline(cfg, scratch_dir, "audit-mono");
      means.push_back(mean_value(a.pairs.records, false));
    }
    bool monotone = true;
    for (std::size_t i = 1; i < means.size(); ++i)
      if (means[i] <= means[i - 1]) monotone = false;
    std::string detail;
    for (double m : means)
      detail += (detail.empty() ? "" : " < ") + report::format_number(m);
    add("location_monotonicity", monotone, detail);
  }

  {  // 4. Specific queries respond more when the boost is on.
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.persona.w_loc = 0.3;
    cfg.persona.specific_affinity_boost = 0.7;
    PipelineArtifacts a = run_pipeline(cfg, scratch_dir, "audit-boost");
    std::vector<double> spec_vals, gen_vals;
    for (const ComparisonRecord& r : a.pairs.records) {
      if (r.same_location) continue;
      (r.query.category == QueryCategory::kSpecific ? spec_vals : gen_vals)
          .push_back(r.value);
    }
    double spec_mean = stats::mean_of(spec_vals);
    double gen_mean = stats::mean_of(gen_vals);
    add("specific_general_gap", spec_mean > gen_mean,
        "specific " + report::format_number(spec_mean) + " vs general " +
            report::format_number(gen_mean));
  }

  {  // 5. Browsing-history effect shows up only across history kinds.
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.persona.w_hist = 1.0;
    cfg.locations = {"IL", "SA"};
    cfg.bots_per_location = 3;
    CrossTypeArtifacts a = run_cross_type_pipeline(cfg, scratch_dir);
    bool t3_vs_t2 = false, t2_vs_t1 = false;
    for (const stats::StatResult& r : a.cross_type.results) {
      if (r.group_labels.size() != 2) continue;
      bool has1 = r.group_labels[0].find("type1") != std::string::npos ||
                  r.group_labels[1].find("type1") != std::string::npos;
      bool has2 = r.group_labels[0].find("type2") != std::string::npos ||
                  r.group_labels[1].find("type2") != std::string::npos;
      bool has3 = r.group_labels[0].find("type3") != std::string::npos ||
                  r.group_labels[1].find("type3") != std::string::npos;
      if (has2 && has3 && !has1 && r.p_adjusted < 0.05) t3_vs_t2 = true;
      if (has1 && has2 && !has3 && r.p_adjusted < 0.05) t2_vs_t1 = true;
    }
    add("history_effect", t3_vs_t2 && !t2_vs_t1,
        std::string("type3-vs-type2 ") + (t3_vs_t2 ? "significant" : "flat") +
            ", type2-vs-type1 " + (t2_vs_t1 ? "significant" : "flat"));
  }

  {  // 6. Leaning skew concentrates pro-Israel News in IL top ranks.
    ScenarioConfig cfg;
    cfg.seed = seed;
    LeaningArtifacts a = run_leaning_pipeline(cfg, scratch_dir);
    double all_share = pro_israel_share(a.all, "IL");
    double top3_share = pro_israel_share(a.top3, "IL");
    bool sums_ok = true;
    for (const annotate::LeaningPanel* panel : {&a.all, &a.top3})
      for (const annotate::LeaningCell& cell : panel->cells) {
        double sum = 0.0;
        for (double p : cell.proportions) sum += p;
        if (std::abs(sum - 1.0) > 1e-9) sums_ok = false;
      }
    add("leaning_skew", top3_share - all_share >= 0.1 && sums_ok,
        "top3 " + report::format_number(top3_share) + " vs all " +
            report::format_number(all_share));
  }

  {  // 7. Determinism: same seed, byte-identical log and chart.
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.persona.w_loc = 1.0;
    cfg.queries_per_category = 2;
    cfg.locations = {"IL", "SA"};
    cfg.resamples = 200;
    PipelineArtifacts a = run_pipeline(cfg, scratch_dir, "audit-golden-a");
    PipelineArtifacts b = run_pipeline(cfg, scratch_dir, "audit-golden-b");
    bool logs_equal = detail::read_bytes(a.log_path) ==
                      detail::read_bytes(b.log_path);
    report::EmitResult chart_a = report::emit_bar_panel(
        a.means, a.fig2.results, "chart", "mean D", scratch_dir, "golden-a");
    report::EmitResult chart_b = report::emit_bar_panel(
        b.means, b.fig2.results, "chart", "mean D", scratch_dir, "golden-b");
    bool svgs_equal = detail::read_bytes(chart_a.files.back()) ==
                      detail::read_bytes(chart_b.files.back());
    add("format_determinism", logs_equal && svgs_equal,
        std::string("log ") + (logs_equal ? "identical" : "differs") +
            ", svg " + (svgs_equal ? "identical" : "differs"));
  }

  return checks;
}

}  // namespace serpaudit::scenarios

#endif  // SERPAUDIT_SCENARIOS_HPP
