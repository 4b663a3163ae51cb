// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Deterministic simulated search engine with injected, analytically known
// personalization. Scores are linear in per-factor document affinities:
//
//   score = base_relevance(query, doc)
//         + (w_loc + specific_boost[query is specific]) * loc_affinity[loc]
//         + w_lang * [doc.lang == lang]
//         + w_hist * <history_topics, hist_affinity>
//         + noise_sigma * seeded_noise(query, doc, context)
//
// Every term depends only on the persona and the request inputs, never on
// bot identity or wall-clock time, so identical requests always receive
// byte-identical result lists.

#ifndef SERPAUDIT_SIMENGINE_HPP
#define SERPAUDIT_SIMENGINE_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "serpaudit/errors.hpp"
#include "serpaudit/model.hpp"
#include "serpaudit/rng.hpp"
#include "serpaudit/vocab.hpp"

namespace serpaudit::sim {

struct EnginePersona {
  std::string name = "simengine";
  double w_loc = 0.0;
  double w_lang = 0.0;
  double w_hist = 0.0;
  double specific_affinity_boost = 0.0;  // extra loc-affinity weight,
                                         // specific queries only
  double noise_sigma = 0.0;
  int epoch = 0;  // shifts base relevance, independent of request context
  std::uint64_t seed = 0;
};

inline void validate(const EnginePersona& p) {
  auto check = [](double v, const char* name) {
    if (!(std::isfinite(v) && v >= 0.0))
      throw Error(std::string("persona ") + name +
                  " must be finite and >= 0");
  };
  check(p.w_loc, "w_loc");
  check(p.w_lang, "w_lang");
  check(p.w_hist, "w_hist");
  check(p.specific_affinity_boost, "specific_affinity_boost");
  check(p.noise_sigma, "noise_sigma");
  if (p.name.empty()) throw Error("persona name must be non-empty");
}

struct CorpusConfig {
  int docs_per_query = 200;
  int domains_per_category = 12;
  // For News documents: probability of a pro-Israel ground-truth leaning
  // scales as skew * loc_affinity["IL"], which concentrates pro-Israel
  // articles in IL top ranks once w_loc > 0. 0 disables the skew.
  double leaning_affinity_skew = 0.0;
};

struct SynthDoc {
  std::string doc_id;
  std::string url;
  std::string domain;
  std::string category;  // Table-style closed vocabulary
  std::map<std::string, double> loc_affinity;   // location code -> [0,1]
  std::string lang;
  std::map<std::string, double> hist_affinity;  // topic -> [0,1]
  bool has_leaning = false;  // true iff category == "News"
  vocab::Leaning leaning = vocab::Leaning::kNeutral;
  std::string title;
  std::string snippet;
  std::string body;
};

struct RequestContext {
  std::string location;
  std::string language;
  std::map<std::string, double> history_topics;  // topic -> exposure [0,1]
};

struct SearchResponse {
  bool known_query = false;
  std::vector<RankedResult> results;
};

struct TrackResponse {
  std::string cookie_name;
  std::string cookie_value;
  std::string body;
};

struct TruthResponse {
  std::string doc_id;
  std::string category;
  bool has_leaning = false;
  vocab::Leaning leaning = vocab::Leaning::kNeutral;
};

namespace detail {

// Category sampling weights per query category, scaled to sum to 1000.
// Specific pools are dominated by News; general pools spread across the
// lifestyle-heavy general vocabulary.
struct CategoryWeight {
  const char* category;
  int weight;
};

inline const std::vector<CategoryWeight>& specific_weights() {
  static const std::vector<CategoryWeight> kWeights = {
      {"News", 830},         {"Reference", 20},  {"Education", 20},
      {"Government", 20},    {"Fact-Checking", 20}, {"Social Media", 20},
      {"Non-Profit", 10},    {"Entertainment", 10}, {"Finance", 10},
      {"Religion", 10},      {"E-Commerce", 10}, {"Technology", 10},
      {"Sports", 4},         {"Travel", 3},      {"Science", 3},
  };
  return kWeights;
}

inline const std::vector<CategoryWeight>& general_weights() {
  static const std::vector<CategoryWeight> kWeights = {
      {"Lifestyle", 260},    {"Health", 180},    {"Entertainment", 130},
      {"Reference", 40},     {"Education", 40},  {"Technology", 40},
      {"News", 40},          {"Business", 30},   {"Finance", 30},
      {"Government", 20},    {"Non-Profit", 20}, {"Social Media", 20},
      {"Travel", 20},        {"E-Commerce", 20}, {"Art", 20},
      {"Science", 20},       {"Fashion", 15},    {"Legal", 15},
      {"Career", 10},        {"Retail", 10},     {"Automotive", 10},
      {"Food", 10},
  };
  return kWeights;
}

inline const char* pick_category(QueryCategory qc, std::uint64_t roll) {
  const auto& weights =
      qc == QueryCategory::kSpecific ? specific_weights() : general_weights();
  std::uint64_t acc = 0;
  for (const CategoryWeight& w : weights) {
    acc += static_cast<std::uint64_t>(w.weight);
    if (roll < acc) return w.category;
  }
  return weights.back().category;
}

inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> kWords = {
      "the",     "report",  "covers",   "recent",  "updates", "about",
      "regional", "events",  "readers",  "find",    "context", "plus",
      "analysis", "from",    "several",  "sources", "with",    "notes",
      "on",      "method",  "details",  "and",     "public",  "records",
  };
  return kWords;
}

inline std::string hex16(std::uint64_t v) {
  static const char* kDigits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace detail

class SimEngine {
 public:
  SimEngine(EnginePersona persona, std::vector<Query> corpus,
            CorpusConfig config = {},
            LocationRegistry registry = LocationRegistry())
      : persona_(std::move(persona)),
        config_(config),
        registry_(std::move(registry)) {
    validate(persona_);
    if (corpus.empty()) throw Error("simengine needs a non-empty corpus");
    if (config_.docs_per_query < 1)
      throw Error("docs_per_query must be >= 1");
    if (config_.domains_per_category < 1)
      throw Error("domains_per_category must be >= 1");
    for (Query& q : corpus) {
      std::string text = q.text;
      if (!pools_.emplace(std::move(text), Pool{std::move(q), {}}).second)
        throw Error("duplicate query in corpus");
    }
    generate_corpus();
  }

  const EnginePersona& persona() const { return persona_; }

  // Derives topic exposures from warm-up cookies ("topic.<kind>.<...>"),
  // normalized so a jar of one topic kind maps to exposure 1.0.
  static std::map<std::string, double> history_topics_from_cookies(
      const std::vector<Cookie>& jar) {
    std::map<std::string, int> counts;
    int total = 0;
    for (const Cookie& c : jar) {
      if (c.name.rfind("topic.", 0) != 0) continue;
      std::string rest = c.name.substr(6);
      std::string kind = rest.substr(0, rest.find('.'));
      if (kind.empty()) continue;
      ++counts[kind];
      ++total;
    }
    std::map<std::string, double> topics;
    for (const auto& [kind, n] : counts)
      topics[kind] = static_cast<double>(n) / static_cast<double>(total);
    return topics;
  }

  // Base relevance of doc for query: uniform on a 1/1024 grid so distinct
  // documents can tie exactly (the tie-break rule is observable), shifted
  // by the epoch knob identically for every request context.
  double base_relevance(const Query& q, const SynthDoc& doc) const {
    rng::Stream s = rng::Stream(persona_.seed)
                        .fork("base")
                        .fork(q.text)
                        .fork(doc.doc_id)
                        .fork(static_cast<std::uint64_t>(
                            static_cast<std::int64_t>(persona_.epoch)));
    return static_cast<double>(s.below(1024)) / 1024.0;
  }

  double score(const SynthDoc& doc, const Query& q,
               const RequestContext& ctx) const {
    double s = base_relevance(q, doc);
    double loc_aff = affinity(doc.loc_affinity, ctx.location);
    double w = persona_.w_loc;
    if (q.category == QueryCategory::kSpecific)
      w += persona_.specific_affinity_boost;
    s += w * loc_aff;
    s += persona_.w_lang * (doc.lang == ctx.language ? 1.0 : 0.0);
    for (const auto& [topic, exposure] : ctx.history_topics)
      s += persona_.w_hist * exposure * affinity(doc.hist_affinity, topic);
    if (persona_.noise_sigma > 0.0)
      s += persona_.noise_sigma * noise(q, doc, ctx);
    return s;
  }

  // Top-10 ranked results for the query under this context. Ties in score
  // break toward the lexicographically smaller doc_id. Unknown queries
  // yield known_query=false with zero results.
  SearchResponse search(const std::string& query_text,
                        const RequestContext& ctx) const {
    auto it = pools_.find(query_text);
    if (it == pools_.end()) return SearchResponse{false, {}};
    const Pool& pool = it->second;
    std::vector<std::pair<double, const SynthDoc*>> scored;
    scored.reserve(pool.docs.size());
    for (const SynthDoc& d : pool.docs)
      scored.emplace_back(score(d, pool.query, ctx), &d);
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second->doc_id < b.second->doc_id;
              });
    SearchResponse resp;
    resp.known_query = true;
    std::size_t n = std::min<std::size_t>(10, scored.size());
    for (std::size_t i = 0; i < n; ++i) {
      const SynthDoc& d = *scored[i].second;
      RankedResult r;
      r.rank = static_cast<int>(i) + 1;
      r.url = d.url;
      r.domain = d.domain;
      r.title = d.title;
      r.snippet = d.snippet;
      resp.results.push_back(std::move(r));
    }
    return resp;
  }

  // Topic-exposure tracker. topic_path looks like "conflict/hamas/3"; the
  // first segment must be a known topic kind. Idempotent per path.
  TrackResponse track(const std::string& topic_path) const {
    std::string kind = topic_path.substr(0, topic_path.find('/'));
    if (kind != "conflict" && kind != "general")
      throw Error("unknown tracking topic kind '" + kind + "'");
    std::string dotted = topic_path;
    std::replace(dotted.begin(), dotted.end(), '/', '.');
    TrackResponse t;
    t.cookie_name = "topic." + dotted;
    t.cookie_value = detail::hex16(
        rng::Stream(persona_.seed).fork("track").fork(topic_path).next());
    t.body = "tracking pixel page for " + dotted + "\n";
    return t;
  }

  const SynthDoc* find_doc(const std::string& doc_id) const {
    auto it = by_id_.find(doc_id);
    return it == by_id_.end() ? nullptr : it->second;
  }

  std::optional<TruthResponse> truth(const std::string& doc_id) const {
    const SynthDoc* d = find_doc(doc_id);
    if (d == nullptr) return std::nullopt;
    TruthResponse t;
    t.doc_id = d->doc_id;
    t.category = d->category;
    t.has_leaning = d->has_leaning;
    t.leaning = d->leaning;
    return t;
  }

  // All documents in the pool for one query, for ground-truth assertions.
  const std::vector<SynthDoc>& pool_for(const std::string& query_text) const {
    auto it = pools_.find(query_text);
    if (it == pools_.end()) throw Error("unknown query '" + query_text + "'");
    return it->second.docs;
  }

  std::vector<std::string> known_queries() const {
    std::vector<std::string> out;
    for (const auto& [text, pool] : pools_) out.push_back(text);
    return out;
  }

 private:
  struct Pool {
    Query query;
    std::vector<SynthDoc> docs;
  };

  static double affinity(const std::map<std::string, double>& m,
                         const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? 0.0 : it->second;
  }

  double noise(const Query& q, const SynthDoc& doc,
               const RequestContext& ctx) const {
    std::string fingerprint = ctx.location + "|" + ctx.language;
    for (const auto& [topic, exposure] : ctx.history_topics) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "|%s=%.17g", topic.c_str(), exposure);
      fingerprint += buf;
    }
    rng::Stream s = rng::Stream(persona_.seed)
                        .fork("noise")
                        .fork(q.text)
                        .fork(doc.doc_id)
                        .fork(fingerprint);
    return s.normal01();
  }

  void generate_corpus() {
    rng::Stream root(persona_.seed);
    std::vector<std::string> locations = registry_.codes();
    std::vector<std::string> langs;
    langs.push_back(LocationRegistry::kDefaultLanguage);
    for (const std::string& loc : locations) {
      const std::string& l = registry_.language_for(loc);
      if (std::find(langs.begin(), langs.end(), l) == langs.end())
        langs.push_back(l);
    }
    for (auto& [text, pool] : pools_) {
      std::string query_tag = detail::hex16(rng::fnv1a64(text));
      for (int i = 0; i < config_.docs_per_query; ++i) {
        rng::Stream s = root.fork("doc").fork(text).fork(
            static_cast<std::uint64_t>(i));
        SynthDoc d;
        char idx[16];
        std::snprintf(idx, sizeof(idx), "%03d", i);
        d.doc_id = query_tag + "-" + idx;
        d.category = detail::pick_category(pool.query.category, s.below(1000));
        std::string slug = vocab::category_slug(d.category);
        d.domain = slug +
                   std::to_string(s.below(static_cast<std::uint64_t>(
                                      config_.domains_per_category)) +
                                  1) +
                   ".example";
        d.url = "https://" + d.domain + "/" + d.doc_id;
        // Language: default language twice as likely as each location one.
        std::uint64_t roll = s.below(static_cast<std::uint64_t>(
            langs.size() + 1));
        d.lang = roll <= 1 ? langs[0] : langs[roll - 1];
        for (const std::string& loc : locations)
          d.loc_affinity[loc] = s.u01();
        d.hist_affinity["conflict"] = s.u01();
        d.hist_affinity["general"] = s.u01();
        d.has_leaning = (d.category == "News");
        if (d.has_leaning) {
          double p_pro_israel =
              config_.leaning_affinity_skew * affinity(d.loc_affinity, "IL");
          if (s.u01() < p_pro_israel) {
            d.leaning = vocab::Leaning::kProIsrael;
          } else {
            d.leaning = vocab::all_leanings()[s.below(
                static_cast<std::uint64_t>(vocab::kLeaningCount))];
          }
        }
        d.title = d.category + " article " + d.doc_id;
        d.snippet = make_sentence(s);
        d.body = d.title + "\n\n" + "Published at " + d.domain + ". " +
                 d.snippet + " " + make_sentence(s) + " " + make_sentence(s) +
                 "\n";
        if (!by_id_.emplace(d.doc_id, nullptr).second)
          throw Error("internal: doc_id collision " + d.doc_id);
        pool.docs.push_back(std::move(d));
      }
    }
    // Pointers are taken only after all pools stop reallocating.
    for (auto& [text, pool] : pools_)
      for (const SynthDoc& d : pool.docs) by_id_[d.doc_id] = &d;
  }

  std::string make_sentence(rng::Stream& s) const {
    const auto& words = detail::filler_words();
    int len = 8 + static_cast<int>(s.below(5));
    std::string sentence;
    for (int i = 0; i < len; ++i) {
      std::string w = words[s.below(words.size())];
      if (i == 0) w[0] = static_cast<char>(
          std::toupper(static_cast<unsigned char>(w[0])));
      if (i > 0) sentence += ' ';
      sentence += w;
    }
    sentence += '.';
    return sentence;
  }

  EnginePersona persona_;
  CorpusConfig config_;
  LocationRegistry registry_;
  std::map<std::string, Pool> pools_;
  std::map<std::string, const SynthDoc*> by_id_;
};

}  // namespace serpaudit::sim

#endif  // SERPAUDIT_SIMENGINE_HPP
