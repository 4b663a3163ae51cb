// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Bot roster construction, browsing-history warm-up, audit orchestration
// (simultaneous waves with humanization), and the post-hoc success and
// balance filters.

#ifndef SERPAUDIT_CRAWLER_HPP
#define SERPAUDIT_CRAWLER_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "serpaudit/engine_client.hpp"
#include "serpaudit/errors.hpp"
#include "serpaudit/model.hpp"
#include "serpaudit/rng.hpp"
#include "serpaudit/serp_log.hpp"

namespace serpaudit::crawl {

// ---------------------------------------------------------------------------
// Roster construction and profile files.
// ---------------------------------------------------------------------------

struct RosterSpec {
  BotType bot_type = BotType::kType1;
  std::vector<std::string> locations;  // registry codes
  // For type 1/2: bots per location. For type 3 the per-location mix is
  // conflict + general + stateless (stateless type-3 bots are the temporal
  // control).
  int per_location = 8;
  int conflict_bots = 3;
  int general_bots = 3;
  int stateless_bots = 2;
  LocationRegistry registry;
};

inline std::vector<BotProfile> make_roster(const RosterSpec& spec) {
  if (spec.locations.empty()) throw Error("roster needs >= 1 location");
  std::vector<BotProfile> roster;
  const char* type_tag = spec.bot_type == BotType::kType1   ? "t1"
                         : spec.bot_type == BotType::kType2 ? "t2"
                                                            : "t3";
  for (const std::string& loc : spec.locations) {
    if (!spec.registry.contains(loc)) throw Error("unknown location " + loc);
    std::string language = spec.bot_type == BotType::kType1
                               ? LocationRegistry::kDefaultLanguage
                               : spec.registry.language_for(loc);
    int count = spec.bot_type == BotType::kType3
                    ? spec.conflict_bots + spec.general_bots +
                          spec.stateless_bots
                    : spec.per_location;
    if (count < 1) throw Error("roster needs >= 1 bot per location");
    for (int i = 0; i < count; ++i) {
      HistoryKind kind = HistoryKind::kStateless;
      if (spec.bot_type == BotType::kType3) {
        if (i < spec.conflict_bots)
          kind = HistoryKind::kConflictNews;
        else if (i < spec.conflict_bots + spec.general_bots)
          kind = HistoryKind::kGeneralNews;
      }
      char idx[16];
      std::snprintf(idx, sizeof(idx), "%02d", i);
      roster.push_back(make_bot_profile(
          std::string(type_tag) + "-" + loc + "-" + idx, spec.bot_type, loc,
          language, kind, loc + "/" + idx));
    }
  }
  return roster;
}

// Profile file: TSV of bot_id, bot_type, location, language, history_kind,
// ip_label, cookie jar as a JSON array (empty jar = []).
inline void save_profiles(const std::vector<BotProfile>& profiles,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write profiles: " + path);
  out << "# bot_id\tbot_type\tlocation\tlanguage\thistory_kind\tip_label"
         "\tcookie_jar\n";
  for (const BotProfile& b : profiles) {
    validate(b);
    nlohmann::ordered_json jar = nlohmann::ordered_json::array();
    for (const Cookie& c : b.cookie_jar) {
      nlohmann::ordered_json item;
      item["name"] = c.name;
      item["value"] = c.value;
      item["origin"] = c.origin_domain;
      jar.push_back(std::move(item));
    }
    out << b.bot_id << '\t' << to_string(b.bot_type) << '\t' << b.location
        << '\t' << b.language << '\t' << to_string(b.history_kind) << '\t'
        << b.ip_label << '\t' << jar.dump() << '\n';
  }
  if (!out) throw Error("profile write failed: " + path);
}

inline std::vector<BotProfile> load_profiles(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open profiles: " + path);
  std::vector<BotProfile> profiles;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string bot_id, type, loc, lang, hist, ip, jar_json;
    if (!std::getline(fields, bot_id, '\t') ||
        !std::getline(fields, type, '\t') ||
        !std::getline(fields, loc, '\t') ||
        !std::getline(fields, lang, '\t') ||
        !std::getline(fields, hist, '\t') ||
        !std::getline(fields, ip, '\t') || !std::getline(fields, jar_json))
      throw ParseError("profile row needs 7 tab-separated fields", line_no);
    try {
      BotProfile b;
      b.bot_id = bot_id;
      b.bot_type = bot_type_from_string(type);
      b.location = loc;
      b.language = lang;
      b.history_kind = history_kind_from_string(hist);
      b.ip_label = ip;
      nlohmann::json jar = nlohmann::json::parse(jar_json);
      for (const nlohmann::json& item : jar)
        b.cookie_jar.push_back(Cookie{item.at("name").get<std::string>(),
                                      item.at("value").get<std::string>(),
                                      item.at("origin").get<std::string>()});
      validate(b);
      profiles.push_back(std::move(b));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad cookie jar: ") + e.what(), line_no);
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (profiles.empty()) throw Error("no profiles in " + path);
  return profiles;
}

inline std::map<std::string, std::string> ip_labels_of(
    const std::vector<BotProfile>& profiles) {
  std::map<std::string, std::string> out;
  for (const BotProfile& b : profiles) out[b.bot_id] = b.ip_label;
  return out;
}

// ---------------------------------------------------------------------------
// Warm-up URL lists (Media Cloud export stand-in).
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& conflict_keywords() {
  static const std::vector<std::string> kWords = {"Palestine", "Israel",
                                                  "Hamas", "Netanyahu"};
  return kWords;
}

inline const std::vector<std::string>& general_keywords() {
  static const std::vector<std::string> kWords = {
      "movie", "health", "well-being", "dinner recipe", "sports"};
  return kWords;
}

struct UrlLists {
  std::vector<std::string> conflict;
  std::vector<std::string> general;
};

namespace detail {

inline std::string lower(std::string s) {
  for (char& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool keyword_in(const std::vector<std::string>& keywords,
                       const std::string& value) {
  std::string v = lower(value);
  for (const std::string& k : keywords)
    if (lower(k) == v) return true;
  return false;
}

}  // namespace detail

// Source file: TSV rows of (url, matched keyword, location, language).
// Rows are partitioned by which keyword set matched and filtered to the
// given location and language. Either partition coming up empty is an
// error: the warm-up cannot proceed for profiles there.
inline UrlLists load_url_lists(const std::vector<std::string>& conflict_kw,
                               const std::vector<std::string>& general_kw,
                               const std::string& source_path,
                               const std::string& location,
                               const std::string& language) {
  std::ifstream in(source_path, std::ios::binary);
  if (!in) throw Error("cannot open URL list: " + source_path);
  UrlLists lists;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string url, keyword, loc, lang;
    if (!std::getline(fields, url, '\t') ||
        !std::getline(fields, keyword, '\t') ||
        !std::getline(fields, loc, '\t') || !std::getline(fields, lang))
      throw ParseError("URL list row needs 4 tab-separated fields", line_no);
    if (loc != location || lang != language) continue;
    if (detail::keyword_in(conflict_kw, keyword))
      lists.conflict.push_back(url);
    else if (detail::keyword_in(general_kw, keyword))
      lists.general.push_back(url);
    else
      throw ParseError("keyword '" + keyword + "' is in neither set",
                       line_no);
  }
  if (lists.conflict.empty())
    throw Error("no conflict URLs for location=" + location +
                " language=" + language);
  if (lists.general.empty())
    throw Error("no general URLs for location=" + location +
                " language=" + language);
  return lists;
}

// ---------------------------------------------------------------------------
// Browsing-history warm-up.
// ---------------------------------------------------------------------------

struct WarmupSpec {
  std::string url_list_path;  // the 4-column TSV above
  int visits = 20;
  std::uint64_t seed = 0;
  std::int64_t dwell_lo_ms = 400;
  std::int64_t dwell_hi_ms = 1200;
};

struct VisitLogEntry {
  std::string url;
  bool ok = false;
  int attempts = 0;
};

struct WarmupResult {
  BotProfile profile;                 // with populated cookie jar
  std::vector<VisitLogEntry> visits;  // in visit order
};

// Core warm-up: visit `visits` URLs sampled without replacement from
// `candidates` in seeded-random order, retrying each failure once. More
// than half the visits failing aborts the warm-up.
inline WarmupResult build_history_from_urls(
    const BotProfile& profile, const std::vector<std::string>& candidates,
    int visits, std::uint64_t seed, ContentFetcher& fetcher,
    Clock* clock = nullptr, std::int64_t dwell_lo_ms = 0,
    std::int64_t dwell_hi_ms = 0) {
  if (profile.history_kind == HistoryKind::kStateless)
    throw Error("stateless profile " + profile.bot_id + " takes no warm-up");
  if (visits < 1) throw Error("warm-up needs >= 1 visit");
  if (static_cast<std::size_t>(visits) > candidates.size())
    throw Error("warm-up needs " + std::to_string(visits) +
                " URLs, only " + std::to_string(candidates.size()) +
                " candidates");

  rng::Stream s = rng::Stream(seed).fork("warmup").fork(profile.bot_id);
  std::vector<std::size_t> order = s.sample_indices(candidates.size(),
                                                    static_cast<std::size_t>(
                                                        visits));
  WarmupResult out;
  out.profile = profile;
  int failures = 0;
  for (std::size_t idx : order) {
    const std::string& url = candidates[idx];
    VisitLogEntry entry;
    entry.url = url;
    FetchResult fetched = fetcher.fetch(url);
    entry.attempts = 1;
    if (!fetched.ok) {
      fetched = fetcher.fetch(url);  // one retry
      entry.attempts = 2;
    }
    entry.ok = fetched.ok;
    if (fetched.ok) {
      for (const Cookie& c : fetched.set_cookies) {
        auto same = std::find_if(out.profile.cookie_jar.begin(),
                                 out.profile.cookie_jar.end(),
                                 [&](const Cookie& existing) {
                                   return existing.name == c.name &&
                                          existing.origin_domain ==
                                              c.origin_domain;
                                 });
        if (same != out.profile.cookie_jar.end())
          *same = c;
        else
          out.profile.cookie_jar.push_back(c);
      }
    } else {
      ++failures;
    }
    out.visits.push_back(std::move(entry));
    if (clock != nullptr && dwell_hi_ms > dwell_lo_ms)
      clock->advance_ms(s.range(dwell_lo_ms, dwell_hi_ms));
  }
  if (failures * 2 > visits)
    throw Error("warm-up for " + profile.bot_id + " failed " +
                std::to_string(failures) + "/" + std::to_string(visits) +
                " visits");
  validate(out.profile);
  return out;
}

// File-driven wrapper: partitions the spec's URL list with the built-in
// keyword sets, filtered by the profile's location/language, and visits the
// list matching the profile's history kind.
inline WarmupResult build_history(const BotProfile& profile,
                                  const WarmupSpec& spec,
                                  ContentFetcher& fetcher,
                                  Clock* clock = nullptr) {
  UrlLists lists =
      load_url_lists(conflict_keywords(), general_keywords(),
                     spec.url_list_path, profile.location, profile.language);
  const std::vector<std::string>& candidates =
      profile.history_kind == HistoryKind::kConflictNews ? lists.conflict
                                                         : lists.general;
  return build_history_from_urls(profile, candidates, spec.visits, spec.seed,
                                 fetcher, clock, spec.dwell_lo_ms,
                                 spec.dwell_hi_ms);
}

// ---------------------------------------------------------------------------
// Audit orchestration.
// ---------------------------------------------------------------------------

struct AuditPlan {
  std::string audit_id;
  std::vector<std::string> engines;
  std::vector<Query> queries;
  std::vector<BotProfile> profiles;
  int repeat_count = 2;
  std::int64_t inter_query_delay_lo_ms = 200;
  std::int64_t inter_query_delay_hi_ms = 800;
  std::int64_t typing_delay_lo_ms = 40;   // per character
  std::int64_t typing_delay_hi_ms = 120;  // per character
  std::uint64_t jitter_seed = 0;
};

inline constexpr std::int64_t kSimultaneityWindowMs = 60000;

inline void validate(const AuditPlan& plan) {
  if (plan.audit_id.empty()) throw Error("plan needs an audit_id");
  if (plan.engines.empty()) throw Error("plan needs >= 1 engine");
  if (plan.queries.empty()) throw Error("plan needs >= 1 query");
  if (plan.profiles.empty()) throw Error("plan needs >= 1 profile");
  if (plan.repeat_count < 1) throw Error("repeat_count must be >= 1");
  if (plan.inter_query_delay_lo_ms < 0 ||
      plan.inter_query_delay_hi_ms < plan.inter_query_delay_lo_ms)
    throw Error("bad inter-query delay range");
  if (plan.typing_delay_lo_ms < 0 ||
      plan.typing_delay_hi_ms < plan.typing_delay_lo_ms)
    throw Error("bad typing delay range");
  for (const BotProfile& b : plan.profiles) serpaudit::validate(b);
  std::set<std::string> ids;
  for (const BotProfile& b : plan.profiles)
    if (!ids.insert(b.bot_id).second)
      throw Error("duplicate bot_id " + b.bot_id);
  // The humanization budget must keep every wave inside the simultaneity
  // window.
  std::size_t longest = 0;
  for (const Query& q : plan.queries) longest = std::max(longest,
                                                         q.text.size());
  std::int64_t worst = plan.typing_delay_hi_ms *
                       static_cast<std::int64_t>(longest);
  if (worst > kSimultaneityWindowMs)
    throw Error("typing delays can exceed the simultaneity window");
}

struct AuditOutcome {
  std::size_t records_written = 0;
  std::vector<std::string> engine_outages;  // engines aborted mid-audit
};

// Dispatches every (engine, query) to every profile, repeat_count times.
// Within one (engine, query, repeat) wave all profiles run concurrently in
// fresh sessions seeded from their warm-up jars; each dispatch gets a
// seeded humanized delay and the wave's records land in profile order.
// Per-bot failures become non-Ok records; an EngineOutage aborts only the
// engine that raised it.
inline AuditOutcome run_audit(const AuditPlan& plan,
                              const std::vector<EngineClient*>& clients,
                              const std::string& log_path, Clock& clock) {
  validate(plan);
  std::map<std::string, EngineClient*> by_name;
  for (EngineClient* c : clients) by_name[c->name()] = c;
  for (const std::string& engine : plan.engines)
    if (by_name.find(engine) == by_name.end())
      throw Error("no client for engine " + engine);

  SerpLogWriter writer(log_path);
  AuditOutcome outcome;
  rng::Stream jitter(plan.jitter_seed);

  for (const std::string& engine : plan.engines) {
    EngineClient* client = by_name[engine];
    bool outage = false;
    for (int rep = 0; rep < plan.repeat_count && !outage; ++rep) {
      for (const Query& query : plan.queries) {
        if (outage) break;
        std::int64_t wave_start = clock.now_ms();
        // Schedule per-bot humanized delays for this wave.
        std::vector<std::int64_t> delays(plan.profiles.size());
        for (std::size_t i = 0; i < plan.profiles.size(); ++i) {
          rng::Stream s = jitter.fork("delay")
                              .fork(engine)
                              .fork(query.text)
                              .fork(static_cast<std::uint64_t>(rep))
                              .fork(plan.profiles[i].bot_id);
          std::int64_t per_char =
              s.range(plan.typing_delay_lo_ms, plan.typing_delay_hi_ms);
          delays[i] = per_char * static_cast<std::int64_t>(query.text.size());
        }

        struct WaveSlot {
          SerpFetch fetch;
          bool outage = false;
        };
        std::vector<std::future<WaveSlot>> slots;
        slots.reserve(plan.profiles.size());
        for (std::size_t i = 0; i < plan.profiles.size(); ++i) {
          std::int64_t delay = delays[i];
          slots.push_back(std::async(std::launch::async, [&, delay, i]() {
            const BotProfile& bot = plan.profiles[i];
            WaveSlot slot;
            clock.worker_sleep_ms(delay);
            Session session{bot.cookie_jar};
            try {
              slot.fetch = client->search(query, bot, session);
            } catch (const EngineOutage&) {
              slot.fetch = SerpFetch{FetchStatus::kTimeout, {}};
              slot.outage = true;
            } catch (const std::exception&) {
              slot.fetch = SerpFetch{FetchStatus::kTimeout, {}};
            }
            return slot;
          }));
        }

        std::int64_t max_delay = 0;
        for (std::size_t i = 0; i < plan.profiles.size(); ++i) {
          WaveSlot slot = slots[i].get();
          if (slot.outage) outage = true;
          writer.write(SerpRecord::make(plan.audit_id, engine,
                                        plan.profiles[i], query,
                                        wave_start + delays[i],
                                        slot.fetch.status,
                                        std::move(slot.fetch.results)));
          max_delay = std::max(max_delay, delays[i]);
        }
        rng::Stream gap = jitter.fork("gap").fork(engine).fork(query.text)
                              .fork(static_cast<std::uint64_t>(rep));
        clock.advance_ms(max_delay + gap.range(plan.inter_query_delay_lo_ms,
                                               plan.inter_query_delay_hi_ms));
      }
    }
    if (outage) outcome.engine_outages.push_back(engine);
  }
  outcome.records_written = writer.count();
  return outcome;
}

// ---------------------------------------------------------------------------
// Success rule (post-collection filter).
// ---------------------------------------------------------------------------

struct Exclusion {
  std::string location;
  std::string engine;
  std::string query_text;
  int qualifying_ips = 0;
  std::string reason;
};

struct SuccessFilterOutput {
  std::vector<SerpRecord> kept;
  std::vector<Exclusion> report;
};

// Keeps a (location, engine, query) cell only if at least min_ips distinct
// egress IPs each contributed an Ok record with at least min_urls results.
// Records of dropped cells are removed wholesale; the report says why.
inline SuccessFilterOutput success_filter(
    const std::vector<SerpRecord>& log,
    const std::map<std::string, std::string>& ip_labels, int min_urls = 4,
    int min_ips = 3) {
  if (min_urls < 1 || min_ips < 1)
    throw Error("success_filter thresholds must be >= 1");
  using CellKey = std::tuple<std::string, std::string, std::string>;
  std::map<CellKey, std::set<std::string>> qualifying;
  std::set<CellKey> all_cells;
  for (const SerpRecord& r : log) {
    auto it = ip_labels.find(r.bot_id);
    if (it == ip_labels.end())
      throw Error("no ip_label for bot " + r.bot_id);
    CellKey key{r.location, r.engine, r.query.text};
    all_cells.insert(key);
    if (r.status == FetchStatus::kOk &&
        r.results.size() >= static_cast<std::size_t>(min_urls))
      qualifying[key].insert(it->second);
  }
  SuccessFilterOutput out;
  std::set<CellKey> kept_cells;
  for (const CellKey& key : all_cells) {
    int ips = static_cast<int>(qualifying[key].size());
    if (ips >= min_ips) {
      kept_cells.insert(key);
    } else {
      Exclusion e;
      e.location = std::get<0>(key);
      e.engine = std::get<1>(key);
      e.query_text = std::get<2>(key);
      e.qualifying_ips = ips;
      e.reason = "insufficient IPs";
      out.report.push_back(std::move(e));
    }
  }
  for (const SerpRecord& r : log)
    if (kept_cells.count(CellKey{r.location, r.engine, r.query.text}))
      out.kept.push_back(r);
  return out;
}

inline void save_exclusion_report(const std::vector<Exclusion>& report,
                                  const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write exclusion report: " + path);
  out << "location\tengine\tquery_text\tqualifying_ips\treason\n";
  for (const Exclusion& e : report)
    out << e.location << '\t' << e.engine << '\t' << e.query_text << '\t'
        << e.qualifying_ips << '\t' << e.reason << '\n';
}

// ---------------------------------------------------------------------------
// Balancing (equal query categories, equal bots per location).
// ---------------------------------------------------------------------------

// Per engine: keeps only queries whose cells survived in every location the
// engine covers, equalizes general/specific query counts by seeded
// subsampling, and subsamples every location's bot set down to the smallest
// location. Already balanced input passes through unchanged.
inline std::vector<SerpRecord> balance(const std::vector<SerpRecord>& log,
                                       std::uint64_t seed) {
  rng::Stream root(seed);

  struct EngineView {
    std::set<std::string> locations;
    std::map<std::string, std::set<std::string>> query_locations;
    std::map<std::string, QueryCategory> query_category;
    std::map<std::string, std::set<std::string>> bots_by_location;
  };
  std::map<std::string, EngineView> engines;
  for (const SerpRecord& r : log) {
    EngineView& v = engines[r.engine];
    v.locations.insert(r.location);
    v.query_locations[r.query.text].insert(r.location);
    v.query_category[r.query.text] = r.query.category;
    v.bots_by_location[r.location].insert(r.bot_id);
  }

  // Seeded subsample of k strings out of a sorted set.
  auto subsample = [&](const std::vector<std::string>& sorted_items,
                       std::size_t k, rng::Stream s) {
    std::set<std::string> chosen;
    std::vector<std::size_t> idx = s.sample_indices(sorted_items.size(), k);
    for (std::size_t i : idx) chosen.insert(sorted_items[i]);
    return chosen;
  };

  std::map<std::string, std::set<std::string>> kept_queries;
  std::map<std::string, std::set<std::string>> kept_bots;
  for (auto& [engine, view] : engines) {
    // A query survives only where its cell survived everywhere the engine
    // has coverage.
    std::vector<std::string> general, specific;
    for (const auto& [text, locs] : view.query_locations) {
      if (locs != view.locations) continue;
      (view.query_category[text] == QueryCategory::kGeneral ? general
                                                            : specific)
          .push_back(text);
    }
    std::size_t target = std::min(general.size(), specific.size());
    if (target == 0)
      throw Error("engine " + engine +
                  " has zero surviving queries in one category");
    std::set<std::string>& queries = kept_queries[engine];
    for (const std::string& q :
         subsample(general, target, root.fork("queries").fork(engine).fork(
                                        "general")))
      queries.insert(q);
    for (const std::string& q :
         subsample(specific, target, root.fork("queries").fork(engine).fork(
                                         "specific")))
      queries.insert(q);

    std::size_t min_bots = SIZE_MAX;
    for (const auto& [loc, bots] : view.bots_by_location)
      min_bots = std::min(min_bots, bots.size());
    for (const auto& [loc, bots] : view.bots_by_location) {
      if (bots.empty())
        throw Error("location " + loc + " has zero surviving bots for " +
                    engine);
      std::vector<std::string> sorted(bots.begin(), bots.end());
      for (const std::string& b :
           subsample(sorted, min_bots,
                     root.fork("bots").fork(engine).fork(loc)))
        kept_bots[engine].insert(b);
    }
  }

  std::vector<SerpRecord> out;
  for (const SerpRecord& r : log) {
    if (kept_queries[r.engine].count(r.query.text) &&
        kept_bots[r.engine].count(r.bot_id))
      out.push_back(r);
  }
  return out;
}

}  // namespace serpaudit::crawl

#endif  // SERPAUDIT_CRAWLER_HPP
