// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Command-line surface: roster construction, warm-up, audit runs, the
// simulated engine server, success/balance filtering, pair metrics, the
// statistics suites, categorization, leaning aggregation, report emission,
// and the end-to-end validation suite.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "serpaudit/analyze.hpp"
#include "serpaudit/annotate.hpp"
#include "serpaudit/crawler.hpp"
#include "serpaudit/engine_client.hpp"
#include "serpaudit/errors.hpp"
#include "serpaudit/query_corpus.hpp"
#include "serpaudit/report.hpp"
#include "serpaudit/scenarios.hpp"
#include "serpaudit/serp_log.hpp"
#include "serpaudit/sim_server.hpp"

namespace {

using namespace serpaudit;

std::string proxy_from_env() {
  const char* p = std::getenv("PROXY_URL");
  return p == nullptr ? std::string() : std::string(p);
}

std::vector<Query> load_queries_arg(const std::string& arg) {
  return arg == "builtin" ? builtin_query_corpus() : load_query_corpus(arg);
}

// Audit plan file: JSON with audit_id, engines (name + kind: sim_http with
// base_url, or live with selector_config), queries ("builtin" or a TSV
// path), and optional pacing overrides.
struct LoadedPlan {
  crawl::AuditPlan plan;
  std::vector<std::unique_ptr<crawl::EngineClient>> clients;
};

LoadedPlan load_plan_file(const std::string& path,
                          std::vector<BotProfile> profiles,
                          std::uint64_t seed_override, bool has_seed) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open plan: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("plan " + path + ": " + e.what());
  }
  LoadedPlan out;
  out.plan.audit_id = j.value("audit_id", "");
  out.plan.profiles = std::move(profiles);
  std::string queries = j.value("queries", "builtin");
  std::vector<Query> corpus = load_queries_arg(queries);
  if (j.value("type3_subset_only", false)) corpus = type3_subset(corpus);
  out.plan.queries = std::move(corpus);
  out.plan.repeat_count = j.value("repeat_count", 2);
  if (j.contains("inter_query_delay_ms")) {
    out.plan.inter_query_delay_lo_ms = j["inter_query_delay_ms"].at(0);
    out.plan.inter_query_delay_hi_ms = j["inter_query_delay_ms"].at(1);
  }
  if (j.contains("typing_delay_ms")) {
    out.plan.typing_delay_lo_ms = j["typing_delay_ms"].at(0);
    out.plan.typing_delay_hi_ms = j["typing_delay_ms"].at(1);
  }
  out.plan.jitter_seed =
      has_seed ? seed_override
               : j.value("jitter_seed", static_cast<std::uint64_t>(0));

  if (!j.contains("engines") || !j["engines"].is_array() ||
      j["engines"].empty())
    throw Error("plan needs a non-empty engines array");
  std::string proxy = proxy_from_env();
  for (const nlohmann::json& e : j["engines"]) {
    std::string name = e.value("name", "");
    std::string kind = e.value("kind", "");
    if (name.empty()) throw Error("plan engine entry needs a name");
    if (kind == "sim_http") {
      std::string base = e.value("base_url", "");
      if (base.empty()) throw Error("sim_http engine needs base_url");
      out.clients.push_back(
          std::make_unique<crawl::HttpSimClient>(base, name, proxy));
    } else if (kind == "live") {
      std::string cfg_path = e.value("selector_config", "");
      if (cfg_path.empty()) throw Error("live engine needs selector_config");
      crawl::SelectorConfig cfg = crawl::load_selector_config(cfg_path);
      cfg.engine = name;
      out.clients.push_back(
          std::make_unique<crawl::LiveHtmlClient>(std::move(cfg), proxy));
    } else {
      throw Error("unknown engine kind '" + kind + "' (sim_http or live)");
    }
    out.plan.engines.push_back(std::move(name));
  }
  return out;
}

std::map<std::string, std::string> load_plain_category_map(
    const std::string& path) {
  return annotate::plain_category_map(annotate::load_category_map(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serpaudit: location/language/history personalization audits "
               "of search engines, with a simulated engine for validation"};
  app.require_subcommand(1);
  int exit_code = 0;

  // ------------------------------------------------------------------ profile
  auto* profile = app.add_subcommand("profile", "Bot roster files");
  profile->require_subcommand(1);
  auto* profile_make = profile->add_subcommand("make", "Construct a roster");
  struct {
    std::string type = "type2";
    std::vector<std::string> locations;
    int per_location = 8;
    int conflict = 3, general = 3, stateless = 2;
    std::string out;
  } pm;
  profile_make->add_option("--type", pm.type,
                           "Profile type: type1, type2, type3");
  profile_make->add_option("--locations", pm.locations, "Location codes")
      ->delimiter(',')
      ->required();
  profile_make->add_option("--per-location", pm.per_location,
                           "Bots per location (type1/type2)");
  profile_make->add_option("--conflict", pm.conflict,
                           "Type-3 conflict-history bots per location");
  profile_make->add_option("--general", pm.general,
                           "Type-3 general-history bots per location");
  profile_make->add_option("--stateless", pm.stateless,
                           "Type-3 stateless control bots per location");
  profile_make->add_option("--out", pm.out, "Output profile TSV")->required();
  profile_make->callback([&] {
    crawl::RosterSpec spec;
    spec.bot_type = bot_type_from_string(pm.type);
    spec.locations = pm.locations;
    spec.per_location = pm.per_location;
    spec.conflict_bots = pm.conflict;
    spec.general_bots = pm.general;
    spec.stateless_bots = pm.stateless;
    std::vector<BotProfile> roster = crawl::make_roster(spec);
    crawl::save_profiles(roster, pm.out);
    std::cout << "wrote " << roster.size() << " profiles to " << pm.out
              << "\n";
  });

  // ------------------------------------------------------------------ warmup
  auto* warmup = app.add_subcommand("warmup", "Browsing-history warm-up");
  warmup->require_subcommand(1);
  auto* warmup_run = warmup->add_subcommand(
      "run", "Visit keyword-matched URLs and persist cookie jars");
  struct {
    std::string profiles, urls, out, report;
    int visits = 20;
    std::uint64_t seed = 0;
    std::int64_t dwell_lo = 400, dwell_hi = 1200;
  } wu;
  warmup_run->add_option("--profiles", wu.profiles, "Input profile TSV")
      ->required();
  warmup_run->add_option("--urls", wu.urls,
                         "URL list TSV (url, keyword, location, language)")
      ->required();
  warmup_run->add_option("--visits", wu.visits, "Visits per profile");
  warmup_run->add_option("--seed", wu.seed, "Visit-order seed");
  warmup_run->add_option("--dwell-lo", wu.dwell_lo, "Min dwell per visit, ms");
  warmup_run->add_option("--dwell-hi", wu.dwell_hi, "Max dwell per visit, ms");
  warmup_run->add_option("--out", wu.out, "Output profile TSV")->required();
  warmup_run->add_option("--report", wu.report, "Visit log TSV");
  warmup_run->callback([&] {
    std::vector<BotProfile> profiles = crawl::load_profiles(wu.profiles);
    crawl::HttpFetcher fetcher(proxy_from_env());
    crawl::RealClock clock;
    crawl::WarmupSpec spec;
    spec.url_list_path = wu.urls;
    spec.visits = wu.visits;
    spec.seed = wu.seed;
    spec.dwell_lo_ms = wu.dwell_lo;
    spec.dwell_hi_ms = wu.dwell_hi;
    std::ofstream report;
    if (!wu.report.empty()) {
      report.open(wu.report, std::ios::binary | std::ios::trunc);
      report << "bot_id\turl\tok\tattempts\n";
    }
    for (BotProfile& b : profiles) {
      if (b.history_kind == HistoryKind::kStateless) continue;
      crawl::WarmupResult r = crawl::build_history(b, spec, fetcher, &clock);
      b = r.profile;
      if (report.is_open())
        for (const crawl::VisitLogEntry& v : r.visits)
          report << b.bot_id << '\t' << v.url << '\t' << (v.ok ? 1 : 0)
                 << '\t' << v.attempts << '\n';
    }
    crawl::save_profiles(profiles, wu.out);
    std::cout << "wrote " << profiles.size() << " profiles to " << wu.out
              << "\n";
  });

  // ------------------------------------------------------------------- audit
  auto* audit = app.add_subcommand("audit", "Audit orchestration");
  audit->require_subcommand(1);
  auto* audit_run = audit->add_subcommand(
      "run", "Dispatch every query to every profile on every engine");
  struct {
    std::string config, profiles, log;
    std::uint64_t seed = 0;
    bool has_seed = false;
    bool virtual_clock = false;
  } ar;
  audit_run->add_option("--config", ar.config, "Audit plan JSON")->required();
  audit_run->add_option("--profiles", ar.profiles, "Profile TSV")->required();
  audit_run->add_option("--log", ar.log, "Output SERP log (NDJSON)")
      ->required();
  audit_run->add_option("--seed", ar.seed, "Jitter seed override")
      ->each([&](const std::string&) { ar.has_seed = true; });
  audit_run->add_flag("--virtual-clock", ar.virtual_clock,
                      "Schedule delays on a virtual clock (no sleeping)");
  audit_run->callback([&] {
    LoadedPlan loaded = load_plan_file(
        ar.config, crawl::load_profiles(ar.profiles), ar.seed, ar.has_seed);
    std::vector<crawl::EngineClient*> clients;
    for (const auto& c : loaded.clients) clients.push_back(c.get());
    std::unique_ptr<crawl::Clock> clock;
    if (ar.virtual_clock)
      clock = std::make_unique<crawl::SimClock>();
    else
      clock = std::make_unique<crawl::RealClock>();
    crawl::AuditOutcome outcome =
        crawl::run_audit(loaded.plan, clients, ar.log, *clock);
    std::cout << "wrote " << outcome.records_written << " records to "
              << ar.log << "\n";
    for (const std::string& engine : outcome.engine_outages)
      std::cerr << "warning: engine " << engine << " aborted (outage)\n";
  });

  // --------------------------------------------------------------------- sim
  auto* sim_cmd = app.add_subcommand("sim", "Simulated engine");
  sim_cmd->require_subcommand(1);
  auto* sim_serve = sim_cmd->add_subcommand(
      "serve", "Serve the simulated engine over HTTP");
  struct {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::uint64_t seed = 0;
    std::string name = "sim";
    std::string queries = "builtin";
    bool allow_truth = false;
    double w_loc = 0, w_lang = 0, w_hist = 0, boost = 0, noise = 0;
    int epoch = 0, docs = 200, domains = 12;
    double skew = 0;
  } sv;
  sim_serve->add_option("--host", sv.host, "Bind address");
  sim_serve->add_option("--port", sv.port, "Port");
  sim_serve->add_option("--seed", sv.seed, "Engine seed");
  sim_serve->add_option("--name", sv.name, "Engine name");
  sim_serve->add_option("--queries", sv.queries,
                        "Query corpus: 'builtin' or a TSV path");
  sim_serve->add_flag("--allow-truth", sv.allow_truth,
                      "Expose the ground-truth endpoint");
  sim_serve->add_option("--w-loc", sv.w_loc, "Location affinity weight");
  sim_serve->add_option("--w-lang", sv.w_lang, "Language match weight");
  sim_serve->add_option("--w-hist", sv.w_hist, "History affinity weight");
  sim_serve->add_option("--specific-boost", sv.boost,
                        "Extra location weight for specific queries");
  sim_serve->add_option("--noise", sv.noise, "Context noise sigma");
  sim_serve->add_option("--epoch", sv.epoch, "Base-relevance epoch");
  sim_serve->add_option("--docs-per-query", sv.docs, "Pool size per query");
  sim_serve->add_option("--domains-per-category", sv.domains,
                        "Domain pool per category");
  sim_serve->add_option("--leaning-skew", sv.skew,
                        "Pro-Israel leaning skew factor for News");
  sim_serve->callback([&] {
    sim::EnginePersona persona;
    persona.name = sv.name;
    persona.seed = sv.seed;
    persona.w_loc = sv.w_loc;
    persona.w_lang = sv.w_lang;
    persona.w_hist = sv.w_hist;
    persona.specific_affinity_boost = sv.boost;
    persona.noise_sigma = sv.noise;
    persona.epoch = sv.epoch;
    sim::CorpusConfig corpus;
    corpus.docs_per_query = sv.docs;
    corpus.domains_per_category = sv.domains;
    corpus.leaning_affinity_skew = sv.skew;
    sim::SimEngine engine(persona, load_queries_arg(sv.queries), corpus);
    sim::SimServer server(engine, sv.allow_truth);
    std::cout << "serving " << sv.name << " on " << sv.host << ":" << sv.port
              << std::endl;
    if (!server.listen_blocking(sv.host, sv.port))
      throw Error("cannot listen on " + sv.host + ":" +
                  std::to_string(sv.port));
  });

  // ------------------------------------------------------------------ filter
  auto* filter = app.add_subcommand("filter", "Post-collection filters");
  filter->require_subcommand(1);
  auto* filter_success = filter->add_subcommand(
      "success", "Keep cells with enough distinct successful IPs");
  struct {
    std::string log, profiles, out, report;
    int min_urls = 4, min_ips = 3;
  } fs;
  filter_success->add_option("--log", fs.log, "Input SERP log")->required();
  filter_success->add_option("--profiles", fs.profiles, "Profile TSV")
      ->required();
  filter_success->add_option("--out", fs.out, "Output SERP log")->required();
  filter_success->add_option("--report", fs.report, "Exclusion report TSV");
  filter_success->add_option("--min-urls", fs.min_urls,
                             "Minimum results per Ok record");
  filter_success->add_option("--min-ips", fs.min_ips,
                             "Minimum distinct qualifying IPs per cell");
  filter_success->callback([&] {
    std::vector<SerpRecord> log = read_serp_log(fs.log);
    auto labels = crawl::ip_labels_of(crawl::load_profiles(fs.profiles));
    crawl::SuccessFilterOutput out =
        crawl::success_filter(log, labels, fs.min_urls, fs.min_ips);
    write_serp_log(out.kept, fs.out);
    if (!fs.report.empty()) crawl::save_exclusion_report(out.report, fs.report);
    std::cout << "kept " << out.kept.size() << "/" << log.size()
              << " records, excluded " << out.report.size() << " cells\n";
  });

  // ----------------------------------------------------------------- balance
  auto* balance_cmd = app.add_subcommand(
      "balance", "Equalize query categories and bots per location");
  struct {
    std::string log, out;
    std::uint64_t seed = 0;
  } bl;
  balance_cmd->add_option("--log", bl.log, "Input SERP log")->required();
  balance_cmd->add_option("--out", bl.out, "Output SERP log")->required();
  balance_cmd->add_option("--seed", bl.seed, "Subsample seed");
  balance_cmd->callback([&] {
    std::vector<SerpRecord> log = read_serp_log(bl.log);
    std::vector<SerpRecord> balanced = crawl::balance(log, bl.seed);
    write_serp_log(balanced, bl.out);
    std::cout << "kept " << balanced.size() << "/" << log.size()
              << " records\n";
  });

  // ----------------------------------------------------------------- compare
  auto* compare = app.add_subcommand("compare", "Bot-pair comparisons");
  compare->require_subcommand(1);
  auto* compare_pairs = compare->add_subcommand(
      "pairs", "Compute a pair metric over a balanced log");
  struct {
    std::string log, out;
    std::string metric = "d_rbo";
    double p = 0.7;
    std::string variant = "extrapolated";
    std::string grouping, bot_type, query_category, category_map;
    int max_categories = 4;
    int min_words = 0, max_words = 0;
  } cp;
  compare_pairs->add_option("--log", cp.log, "Balanced SERP log")->required();
  compare_pairs->add_option("--out", cp.out, "Output comparison NDJSON")
      ->required();
  compare_pairs->add_option(
      "--metric", cp.metric,
      "d_rbo, edit_distance, symdiff10, common_top3, d_rbo_category");
  compare_pairs->add_option("--p", cp.p, "RBO persistence");
  compare_pairs->add_option("--rbo-variant", cp.variant,
                            "extrapolated or truncated");
  compare_pairs->add_option("--grouping", cp.grouping,
                            "same_location or diff_location (default both)");
  compare_pairs->add_option("--bot-type", cp.bot_type,
                            "Restrict to one profile type");
  compare_pairs->add_option("--query-category", cp.query_category,
                            "Restrict to general or specific");
  compare_pairs->add_option("--category-map", cp.category_map,
                            "Domain category map TSV (category metric)");
  compare_pairs->add_option("--max-categories", cp.max_categories,
                            "Distinct-category cap (category metric)");
  compare_pairs->add_option("--min-words", cp.min_words,
                            "Minimum query word count (0 = off)");
  compare_pairs->add_option("--max-words", cp.max_words,
                            "Maximum query word count (0 = off)");
  compare_pairs->callback([&] {
    analyze::PairingSpec spec;
    spec.metric = metric_from_string(cp.metric);
    spec.config.p = cp.p;
    if (cp.variant == "truncated")
      spec.rbo_variant = metrics::RboVariant::kTruncated;
    else if (cp.variant != "extrapolated")
      throw Error("unknown rbo variant '" + cp.variant + "'");
    if (!cp.grouping.empty())
      spec.grouping = analyze::grouping_from_string(cp.grouping);
    if (!cp.bot_type.empty())
      spec.bot_type = bot_type_from_string(cp.bot_type);
    if (!cp.query_category.empty())
      spec.query_category = query_category_from_string(cp.query_category);
    spec.max_distinct_categories = cp.max_categories;
    if (cp.min_words > 0 || cp.max_words > 0)
      spec.word_count_range = {cp.min_words > 0 ? cp.min_words : 1,
                               cp.max_words > 0 ? cp.max_words : 1 << 20};
    std::map<std::string, std::string> catmap;
    if (spec.metric == Metric::kDRboCategory) {
      if (cp.category_map.empty())
        throw Error("metric d_rbo_category needs --category-map");
      catmap = load_plain_category_map(cp.category_map);
      spec.category_mode = true;
      spec.category_map = &catmap;
    }
    analyze::PairingOutcome out =
        analyze::make_pairs(read_serp_log(cp.log), spec);
    analyze::write_comparison_log(out.records, cp.out);
    for (const std::string& note : out.notes)
      std::cerr << "note: " << note << "\n";
    std::cout << "wrote " << out.records.size() << " comparisons to "
              << cp.out << "\n";
  });

  // ------------------------------------------------------------------- stats
  auto* stats_cmd = app.add_subcommand("stats", "Statistical suites");
  stats_cmd->require_subcommand(1);

  auto* stats_fig2 = stats_cmd->add_subcommand(
      "fig2", "Location/category Mann-Whitney family");
  struct {
    std::string log, out;
    int family_size = 12;
  } sf;
  stats_fig2->add_option("--log", sf.log, "Comparison NDJSON")->required();
  stats_fig2->add_option("--out", sf.out, "Stat result NDJSON")->required();
  stats_fig2->add_option("--family-size", sf.family_size,
                         "Bonferroni family size");
  stats_fig2->callback([&] {
    analyze::TestSuiteResult suite = analyze::run_figure2_tests(
        analyze::read_comparison_log(sf.log), sf.family_size);
    analyze::write_stat_results(suite.results, sf.out);
    for (const std::string& u : suite.untestable)
      std::cerr << "note: " << u << "\n";
    std::cout << "wrote " << suite.results.size() << " results to " << sf.out
              << "\n";
  });

  auto* stats_crosstype = stats_cmd->add_subcommand(
      "crosstype", "Profile-type Mann-Whitney family");
  struct {
    std::string type1, type2, type3, out;
    int family_size = 36;
  } sc;
  stats_crosstype->add_option("--type1", sc.type1, "Type-1 comparison NDJSON")
      ->required();
  stats_crosstype->add_option("--type2", sc.type2, "Type-2 comparison NDJSON")
      ->required();
  stats_crosstype->add_option("--type3", sc.type3, "Type-3 comparison NDJSON")
      ->required();
  stats_crosstype->add_option("--out", sc.out, "Stat result NDJSON")
      ->required();
  stats_crosstype->add_option("--family-size", sc.family_size,
                              "Bonferroni family size");
  stats_crosstype->callback([&] {
    std::map<BotType, std::vector<ComparisonRecord>> by_type;
    by_type[BotType::kType1] = analyze::read_comparison_log(sc.type1);
    by_type[BotType::kType2] = analyze::read_comparison_log(sc.type2);
    by_type[BotType::kType3] = analyze::read_comparison_log(sc.type3);
    analyze::TestSuiteResult suite =
        analyze::run_cross_type_tests(by_type, sc.family_size);
    analyze::write_stat_results(suite.results, sc.out);
    for (const std::string& u : suite.untestable)
      std::cerr << "note: " << u << "\n";
    std::cout << "wrote " << suite.results.size() << " results to " << sc.out
              << "\n";
  });

  auto* stats_anova = stats_cmd->add_subcommand(
      "anova", "Browsing-history one-way ANOVA");
  struct {
    std::string log, profiles, out;
  } sa;
  stats_anova->add_option("--log", sa.log, "Type-3 comparison NDJSON")
      ->required();
  stats_anova->add_option("--profiles", sa.profiles, "Profile TSV")
      ->required();
  stats_anova->add_option("--out", sa.out, "Stat result NDJSON")->required();
  stats_anova->callback([&] {
    std::map<std::string, HistoryKind> history;
    for (const BotProfile& b : crawl::load_profiles(sa.profiles))
      history[b.bot_id] = b.history_kind;
    std::vector<stats::StatResult> results = analyze::run_history_anova(
        analyze::read_comparison_log(sa.log), history);
    analyze::write_stat_results(results, sa.out);
    std::cout << "wrote " << results.size() << " results to " << sa.out
              << "\n";
  });

  // -------------------------------------------------------------- categorize
  auto* categorize = app.add_subcommand("categorize", "Domain categorization");
  categorize->require_subcommand(1);
  auto* categorize_run = categorize->add_subcommand(
      "run", "Map every domain in a log to a category");
  struct {
    std::string log, domains, cache, out, overrides;
    std::string annotator = "stub";
    int concurrency = 1;
  } cr;
  categorize_run->add_option("--log", cr.log, "SERP log to scan for domains");
  categorize_run->add_option("--domains", cr.domains,
                             "Plain file of domains, one per line");
  categorize_run->add_option("--cache", cr.cache, "Response cache directory")
      ->required();
  categorize_run->add_option("--out", cr.out, "Output category map TSV")
      ->required();
  categorize_run->add_option("--overrides", cr.overrides,
                             "Manual override TSV (domain, category)");
  categorize_run->add_option("--annotator", cr.annotator,
                             "'stub' or an annotator endpoint URL");
  categorize_run->add_option("--max-concurrency", cr.concurrency,
                             "Annotator call concurrency cap");
  categorize_run->callback([&] {
    std::set<std::string> domain_set;
    if (!cr.log.empty())
      for (const SerpRecord& r : read_serp_log(cr.log))
        for (const RankedResult& res : r.results)
          domain_set.insert(res.domain);
    if (!cr.domains.empty()) {
      std::ifstream in(cr.domains);
      if (!in) throw Error("cannot open domains: " + cr.domains);
      std::string line;
      while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') domain_set.insert(line);
    }
    if (domain_set.empty())
      throw Error("no domains given (need --log and/or --domains)");
    std::unique_ptr<annotate::Annotator> annotator;
    if (cr.annotator == "stub")
      annotator = std::make_unique<annotate::StubAnnotator>();
    else
      annotator = std::make_unique<annotate::HttpAnnotator>(cr.annotator);
    annotate::CategoryMap map = annotate::categorize_domains(
        std::vector<std::string>(domain_set.begin(), domain_set.end()),
        *annotator, cr.cache, cr.overrides, cr.concurrency);
    annotate::save_category_map(map, cr.out);
    std::cout << "wrote " << map.size() << " domains to " << cr.out << "\n";
  });

  // ----------------------------------------------------------------- leaning
  auto* leaning = app.add_subcommand("leaning", "Political-leaning shares");
  leaning->require_subcommand(1);
  auto* leaning_aggregate = leaning->add_subcommand(
      "aggregate", "Aggregate consensus leanings over News results");
  struct {
    std::string log, labels, category_map, out;
    std::string scope = "all";
    int min_agree = 2;
    bool collapse = false;
  } la;
  leaning_aggregate->add_option("--log", la.log, "Balanced SERP log")
      ->required();
  leaning_aggregate->add_option("--labels", la.labels, "Leaning label TSV")
      ->required();
  leaning_aggregate->add_option("--category-map", la.category_map,
                                "Domain category map TSV")
      ->required();
  leaning_aggregate->add_option("--scope", la.scope, "all or top3");
  leaning_aggregate->add_option("--min-agree", la.min_agree,
                                "Consensus threshold");
  leaning_aggregate->add_flag("--collapse", la.collapse,
                              "Vote over collapsed sides");
  leaning_aggregate->add_option("--out", la.out, "Output directory")
      ->required();
  leaning_aggregate->callback([&] {
    annotate::Scope scope;
    if (la.scope == "all")
      scope = annotate::Scope::kAll;
    else if (la.scope == "top3")
      scope = annotate::Scope::kTop3;
    else
      throw Error("scope must be all or top3");
    auto resolved = annotate::consensus(annotate::load_labels(la.labels),
                                        la.min_agree, la.collapse);
    annotate::LeaningPanel panel = annotate::leaning_proportions(
        read_serp_log(la.log), resolved, load_plain_category_map(la.category_map),
        scope);
    report::EmitResult emitted = report::emit_leaning_panel(
        panel, "News leaning shares (" + la.scope + ")", la.out,
        "leaning_" + la.scope);
    for (const std::string& w : emitted.warnings)
      std::cerr << "note: " << w << "\n";
    for (const std::string& f : emitted.files)
      std::cout << "wrote " << f << "\n";
  });

  // ------------------------------------------------------------------ report
  auto* report_cmd = app.add_subcommand("report", "Report emission");
  report_cmd->require_subcommand(1);
  auto* report_emit = report_cmd->add_subcommand(
      "emit", "Emit a figure (SVG + CSV twin) from pipeline outputs");
  struct {
    std::string figure;
    std::vector<std::string> logs;
    std::string labels, category_map, out;
    std::uint64_t seed = 0;
    int resamples = 10000;
    int family_size = 12;
  } re;
  report_emit
      ->add_option("--figure", re.figure,
                   "fig2, fig3, metrics, leaning, time")
      ->required();
  report_emit
      ->add_option("--log", re.logs,
                   "Input file (repeatable; comparisons for fig2/fig3, "
                   "balanced SERP logs otherwise)")
      ->required();
  report_emit->add_option("--labels", re.labels,
                          "Leaning label TSV (leaning figure)");
  report_emit->add_option("--category-map", re.category_map,
                          "Domain category map TSV");
  report_emit->add_option("--seed", re.seed, "Bootstrap seed");
  report_emit->add_option("--resamples", re.resamples, "Bootstrap resamples");
  report_emit->add_option("--family-size", re.family_size,
                          "Bonferroni family size (fig2/fig3)");
  report_emit->add_option("--out", re.out, "Output directory")->required();
  report_emit->callback([&] {
    report::EmitResult emitted;
    if (re.figure == "fig2" || re.figure == "fig3") {
      std::vector<ComparisonRecord> records =
          analyze::read_comparison_log(re.logs.at(0));
      analyze::GroupMeansResult means =
          analyze::group_means(records, re.seed, re.resamples);
      analyze::TestSuiteResult suite =
          analyze::run_figure2_tests(records, re.family_size);
      std::string title = re.figure == "fig2"
                              ? "Mean D by engine, grouping, query category"
                              : "Mean category-sequence D by engine and "
                                "grouping";
      emitted = report::emit_bar_panel(means, suite.results, title, "mean D",
                                       re.out, re.figure);
    } else if (re.figure == "metrics") {
      std::vector<SerpRecord> log = read_serp_log(re.logs.at(0));
      std::map<std::string, std::string> catmap;
      if (!re.category_map.empty())
        catmap = load_plain_category_map(re.category_map);
      std::map<Metric, analyze::GroupMeansResult> grid;
      for (Metric m : {Metric::kDRbo, Metric::kEditDistance,
                       Metric::kSymDiff10, Metric::kCommonTop3,
                       Metric::kDRboCategory}) {
        if (m == Metric::kDRboCategory && catmap.empty()) continue;
        analyze::PairingSpec spec;
        spec.metric = m;
        if (m == Metric::kDRboCategory) {
          spec.category_mode = true;
          spec.category_map = &catmap;
        }
        grid[m] = analyze::group_means(
            analyze::make_pairs(log, spec).records, re.seed, re.resamples);
      }
      emitted = report::emit_metrics_grid(
          grid, "Pair metrics by engine and grouping", re.out, "metrics");
    } else if (re.figure == "leaning") {
      if (re.labels.empty() || re.category_map.empty())
        throw Error("leaning figure needs --labels and --category-map");
      std::vector<SerpRecord> log = read_serp_log(re.logs.at(0));
      auto resolved = annotate::consensus(annotate::load_labels(re.labels));
      auto catmap = load_plain_category_map(re.category_map);
      for (auto [scope, tag] :
           {std::pair{annotate::Scope::kAll, "leaning_all"},
            std::pair{annotate::Scope::kTop3, "leaning_top3"}}) {
        report::EmitResult one = report::emit_leaning_panel(
            annotate::leaning_proportions(log, resolved, catmap, scope),
            std::string("News leaning shares (") + tag + ")", re.out, tag);
        for (std::string& f : one.files)
          emitted.files.push_back(std::move(f));
        for (std::string& w : one.warnings)
          emitted.warnings.push_back(std::move(w));
      }
    } else if (re.figure == "time") {
      if (re.logs.size() < 2)
        throw Error("time figure needs >= 2 --log epochs");
      std::vector<std::pair<std::string, std::vector<SerpRecord>>> epochs;
      for (const std::string& path : re.logs)
        epochs.emplace_back(std::filesystem::path(path).stem().string(),
                            read_serp_log(path));
      analyze::PairingSpec spec;
      emitted = report::emit_time_control(
          analyze::time_control(epochs, spec),
          "Mean D per epoch (location groupings)", re.out, "time_control");
    } else {
      throw Error("unknown figure '" + re.figure + "'");
    }
    for (const std::string& w : emitted.warnings)
      std::cerr << "warning: " << w << "\n";
    for (const std::string& f : emitted.files)
      std::cout << "wrote " << f << "\n";
  });

  // ---------------------------------------------------------------- validate
  auto* validate_cmd = app.add_subcommand("validate", "Self-checks");
  validate_cmd->require_subcommand(1);
  auto* validate_e2e = validate_cmd->add_subcommand(
      "e2e", "Run the end-to-end simulator validation suite");
  struct {
    std::uint64_t seed = 7;
    std::string out = "e2e-scratch";
  } ve;
  validate_e2e->add_option("--seed", ve.seed, "Scenario seed");
  validate_e2e->add_option("--out", ve.out, "Scratch directory");
  validate_e2e->callback([&] {
    std::vector<scenarios::CheckResult> checks =
        scenarios::run_validation_suite(ve.seed, ve.out);
    bool all_pass = true;
    for (const scenarios::CheckResult& c : checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " (" << c.detail
                << ")\n";
      all_pass = all_pass && c.pass;
    }
    if (!all_pass) exit_code = 2;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
