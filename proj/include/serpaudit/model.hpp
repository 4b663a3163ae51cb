// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Shared domain types for the audit pipeline. All types are immutable value
// types in spirit: construct them through the make_* factories (which enforce
// the documented invariants) and treat instances as read-only afterwards.

#ifndef SERPAUDIT_MODEL_HPP
#define SERPAUDIT_MODEL_HPP

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "serpaudit/errors.hpp"

namespace serpaudit {

// ---------------------------------------------------------------------------
// Enums and their on-disk spellings.
// ---------------------------------------------------------------------------

enum class BotType {
  kType1,  // fresh profile, default language, no history
  kType2,  // location + language vary, still stateless
  kType3,  // location + language + browsing history
};

enum class HistoryKind {
  kStateless,
  kGeneralNews,
  kConflictNews,
};

enum class QueryCategory {
  kGeneral,
  kSpecific,
};

enum class FetchStatus {
  kOk,
  kCaptchaBlocked,
  kTimeout,
  kParseFailure,
};

enum class Metric {
  kDRbo,          // 1 - extrapolated rank-biased overlap over URLs
  kEditDistance,  // Levenshtein over URL sequences
  kSymDiff10,     // |top-10 symmetric difference|
  kCommonTop3,    // |top-3 intersection|
  kDRboCategory,  // 1 - RBO over occurrence-indexed category sequences
};

inline std::string to_string(BotType t) {
  switch (t) {
    case BotType::kType1: return "type1";
    case BotType::kType2: return "type2";
    case BotType::kType3: return "type3";
  }
  throw Error("unknown BotType");
}

inline BotType bot_type_from_string(std::string_view s) {
  if (s == "type1") return BotType::kType1;
  if (s == "type2") return BotType::kType2;
  if (s == "type3") return BotType::kType3;
  throw ParseError("unknown bot_type '" + std::string(s) + "'");
}

inline std::string to_string(HistoryKind k) {
  switch (k) {
    case HistoryKind::kStateless: return "stateless";
    case HistoryKind::kGeneralNews: return "general_news";
    case HistoryKind::kConflictNews: return "conflict_news";
  }
  throw Error("unknown HistoryKind");
}

inline HistoryKind history_kind_from_string(std::string_view s) {
  if (s == "stateless") return HistoryKind::kStateless;
  if (s == "general_news") return HistoryKind::kGeneralNews;
  if (s == "conflict_news") return HistoryKind::kConflictNews;
  throw ParseError("unknown history_kind '" + std::string(s) + "'");
}

inline std::string to_string(QueryCategory c) {
  switch (c) {
    case QueryCategory::kGeneral: return "general";
    case QueryCategory::kSpecific: return "specific";
  }
  throw Error("unknown QueryCategory");
}

inline QueryCategory query_category_from_string(std::string_view s) {
  if (s == "general") return QueryCategory::kGeneral;
  if (s == "specific") return QueryCategory::kSpecific;
  throw ParseError("unknown query_category '" + std::string(s) + "'");
}

inline std::string to_string(FetchStatus s) {
  switch (s) {
    case FetchStatus::kOk: return "ok";
    case FetchStatus::kCaptchaBlocked: return "captcha_blocked";
    case FetchStatus::kTimeout: return "timeout";
    case FetchStatus::kParseFailure: return "parse_failure";
  }
  throw Error("unknown FetchStatus");
}

inline FetchStatus fetch_status_from_string(std::string_view s) {
  if (s == "ok") return FetchStatus::kOk;
  if (s == "captcha_blocked") return FetchStatus::kCaptchaBlocked;
  if (s == "timeout") return FetchStatus::kTimeout;
  if (s == "parse_failure") return FetchStatus::kParseFailure;
  throw ParseError("unknown status '" + std::string(s) + "'");
}

inline std::string to_string(Metric m) {
  switch (m) {
    case Metric::kDRbo: return "d_rbo";
    case Metric::kEditDistance: return "edit_distance";
    case Metric::kSymDiff10: return "symdiff10";
    case Metric::kCommonTop3: return "common_top3";
    case Metric::kDRboCategory: return "d_rbo_category";
  }
  throw Error("unknown Metric");
}

inline Metric metric_from_string(std::string_view s) {
  if (s == "d_rbo") return Metric::kDRbo;
  if (s == "edit_distance") return Metric::kEditDistance;
  if (s == "symdiff10") return Metric::kSymDiff10;
  if (s == "common_top3") return Metric::kCommonTop3;
  if (s == "d_rbo_category") return Metric::kDRboCategory;
  throw ParseError("unknown metric '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Location registry. Locations travel as strings on disk; the registry only
// supplies per-location defaults (browser language) for profile construction.
// ---------------------------------------------------------------------------

class LocationRegistry {
 public:
  // Default language used by fresh (type-1) profiles everywhere.
  static constexpr const char* kDefaultLanguage = "en";

  LocationRegistry() {
    add("IL", "he");
    add("SA", "ar");
    add("BR", "pt");
    add("US-NY", "en");
  }

  void add(const std::string& code, const std::string& language) {
    language_[code] = language;
  }

  bool contains(const std::string& code) const {
    return language_.count(code) > 0;
  }

  const std::string& language_for(const std::string& code) const {
    auto it = language_.find(code);
    if (it == language_.end()) throw Error("unknown location '" + code + "'");
    return it->second;
  }

  std::vector<std::string> codes() const {
    std::vector<std::string> out;
    for (const auto& [code, lang] : language_) out.push_back(code);
    return out;
  }

 private:
  std::map<std::string, std::string> language_;
};

// ---------------------------------------------------------------------------
// Core value types.
// ---------------------------------------------------------------------------

struct Cookie {
  std::string name;
  std::string value;
  std::string origin_domain;

  friend bool operator==(const Cookie&, const Cookie&) = default;
};

struct BotProfile {
  std::string bot_id;
  BotType bot_type = BotType::kType1;
  std::string location;         // registry code, e.g. "IL"
  std::string language;         // BCP-47 tag, e.g. "he"
  HistoryKind history_kind = HistoryKind::kStateless;
  std::vector<Cookie> cookie_jar;
  std::string ip_label;         // opaque egress identity, e.g. "IL/3"

  friend bool operator==(const BotProfile&, const BotProfile&) = default;
};

// Throws if the profile violates the type ladder:
//   type1: default language, stateless;
//   type2: any language, stateless;
//   type3: any history kind (stateless type-3 bots act as temporal controls).
// A non-empty cookie jar requires a non-stateless history kind.
inline void validate(const BotProfile& b) {
  if (b.bot_id.empty()) throw Error("bot_id must be non-empty");
  if (b.location.empty()) throw Error("location must be non-empty");
  if (b.language.empty()) throw Error("language must be non-empty");
  switch (b.bot_type) {
    case BotType::kType1:
      if (b.language != LocationRegistry::kDefaultLanguage)
        throw Error("type1 bot '" + b.bot_id + "' must use default language");
      if (b.history_kind != HistoryKind::kStateless)
        throw Error("type1 bot '" + b.bot_id + "' must be stateless");
      break;
    case BotType::kType2:
      if (b.history_kind != HistoryKind::kStateless)
        throw Error("type2 bot '" + b.bot_id + "' must be stateless");
      break;
    case BotType::kType3:
      break;
  }
  if (!b.cookie_jar.empty() && b.history_kind == HistoryKind::kStateless)
    throw Error("stateless bot '" + b.bot_id + "' must have an empty jar");
}

inline BotProfile make_bot_profile(std::string bot_id, BotType type,
                                   std::string location, std::string language,
                                   HistoryKind history, std::string ip_label) {
  BotProfile b;
  b.bot_id = std::move(bot_id);
  b.bot_type = type;
  b.location = std::move(location);
  b.language = std::move(language);
  b.history_kind = history;
  b.ip_label = std::move(ip_label);
  validate(b);
  return b;
}

inline int count_words(std::string_view text) {
  int n = 0;
  bool in_token = false;
  for (char c : text) {
    bool ws = (c == ' ' || c == '\t' || c == '\n' || c == '\r');
    if (!ws && !in_token) ++n;
    in_token = !ws;
  }
  return n;
}

struct Query {
  std::string text;
  QueryCategory category = QueryCategory::kGeneral;
  int word_count = 0;        // whitespace-token count of text
  bool in_type3_subset = false;  // plan metadata; never serialized

  // Equality ignores in_type3_subset: it marks which queries the audit plan
  // assigns to history bots and is not part of the observation itself.
  friend bool operator==(const Query& a, const Query& b) {
    return a.text == b.text && a.category == b.category &&
           a.word_count == b.word_count;
  }
};

inline Query make_query(std::string text, QueryCategory category,
                        bool in_type3_subset = false) {
  if (text.empty()) throw Error("query text must be non-empty");
  Query q;
  q.word_count = count_words(text);
  q.text = std::move(text);
  q.category = category;
  q.in_type3_subset = in_type3_subset;
  return q;
}

struct RankedResult {
  int rank = 0;         // 1-based position on the page
  std::string url;      // absolute URL
  std::string domain;   // registrable domain of url
  std::string title;
  std::string snippet;  // may be empty

  friend bool operator==(const RankedResult&, const RankedResult&) = default;
};

struct SerpRecord;
inline void validate(const SerpRecord& r);

struct SerpRecord {
  std::string audit_id;
  std::string engine;
  std::string bot_id;
  BotType bot_type = BotType::kType1;
  std::string location;
  std::string language;
  HistoryKind history_kind = HistoryKind::kStateless;
  Query query;
  std::int64_t timestamp_ms = 0;  // UTC milliseconds
  FetchStatus status = FetchStatus::kOk;
  std::vector<RankedResult> results;

  friend bool operator==(const SerpRecord&, const SerpRecord&) = default;

  static SerpRecord make(std::string audit_id, std::string engine,
                         const BotProfile& bot, Query query,
                         std::int64_t timestamp_ms, FetchStatus status,
                         std::vector<RankedResult> results) {
    SerpRecord r;
    r.audit_id = std::move(audit_id);
    r.engine = std::move(engine);
    r.bot_id = bot.bot_id;
    r.bot_type = bot.bot_type;
    r.location = bot.location;
    r.language = bot.language;
    r.history_kind = bot.history_kind;
    r.query = std::move(query);
    r.timestamp_ms = timestamp_ms;
    r.status = status;
    r.results = std::move(results);
    validate(r);
    return r;
  }
};

// Throws unless ranks run 1..n with no gaps and the status/results pairing is
// consistent (ok implies results, any failure implies none).
inline void validate(const SerpRecord& r) {
  if (r.audit_id.empty()) throw Error("audit_id must be non-empty");
  if (r.engine.empty()) throw Error("engine must be non-empty");
  if (r.bot_id.empty()) throw Error("bot_id must be non-empty");
  if (r.query.text.empty()) throw Error("query text must be non-empty");
  if (r.status == FetchStatus::kOk && r.results.empty())
    throw Error("ok record must carry at least one result");
  if (r.status != FetchStatus::kOk && !r.results.empty())
    throw Error("failed record must carry no results");
  for (std::size_t i = 0; i < r.results.size(); ++i) {
    const RankedResult& res = r.results[i];
    if (res.rank != static_cast<int>(i) + 1) {
      std::ostringstream msg;
      msg << "ranks must be contiguous from 1: position " << i + 1
          << " holds rank " << res.rank;
      throw Error(msg.str());
    }
    if (res.url.empty()) throw Error("result url must be non-empty");
    if (res.domain.empty()) throw Error("result domain must be non-empty");
  }
}

struct ComparisonRecord {
  std::string audit_id;
  std::string engine;
  Query query;
  std::string bot_a;
  std::string bot_b;
  bool same_location = false;
  Metric metric = Metric::kDRbo;
  double value = 0.0;

  friend bool operator==(const ComparisonRecord&,
                         const ComparisonRecord&) = default;
};

inline bool is_count_metric(Metric m) {
  return m == Metric::kEditDistance || m == Metric::kSymDiff10 ||
         m == Metric::kCommonTop3;
}

inline void validate(const ComparisonRecord& c) {
  if (c.bot_a == c.bot_b) throw Error("comparison requires distinct bots");
  if (is_count_metric(c.metric)) {
    if (c.value < 0.0 || c.value != static_cast<double>(
                             static_cast<std::int64_t>(c.value)))
      throw Error("count metric value must be a non-negative integer");
  } else {
    if (c.value < 0.0 || c.value > 1.0)
      throw Error("overlap metric value must lie in [0,1]");
  }
}

struct MetricConfig {
  double p = 0.7;           // rank persistence for RBO
  int top_k_symdiff = 10;   // prefix depth for the symmetric difference count
  int top_k_common = 3;     // prefix depth for the intersection count
};

inline void validate(const MetricConfig& cfg) {
  if (!(cfg.p > 0.0 && cfg.p < 1.0)) throw Error("p must lie in (0,1)");
  if (cfg.top_k_symdiff < 1) throw Error("top_k_symdiff must be >= 1");
  if (cfg.top_k_common < 1) throw Error("top_k_common must be >= 1");
}

}  // namespace serpaudit

#endif  // SERPAUDIT_MODEL_HPP
