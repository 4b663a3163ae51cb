// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Domain categorization and article-leaning labeling: pluggable annotator
// client with an on-disk response cache, manual override files, exact-match
// consensus over human labels, and leaning share aggregation.

#ifndef SERPAUDIT_ANNOTATE_HPP
#define SERPAUDIT_ANNOTATE_HPP

#include <array>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "serpaudit/domain.hpp"
#include "serpaudit/engine_client.hpp"
#include "serpaudit/errors.hpp"
#include "serpaudit/model.hpp"
#include "serpaudit/rng.hpp"
#include "serpaudit/vocab.hpp"

namespace serpaudit::annotate {

// ---------------------------------------------------------------------------
// Prompts.
// ---------------------------------------------------------------------------

inline std::string domain_prompt() {
  std::string categories;
  for (const std::string& c : vocab::all_categories()) {
    if (!categories.empty()) categories += ", ";
    categories += c;
  }
  return "Classify the website domain {domain} into exactly one of the "
         "following categories: " +
         categories + ". Respond with only the category name.";
}

inline std::string leaning_prompt() {
  return "Classify the leaning of the following article text as exactly one "
         "of: pro-Israel, slightly pro-Israel, neutral, slightly "
         "pro-Palestine, pro-Palestine. Pro-Israel or pro-Palestine means "
         "that the text favors the narrative of that side of the conflict, "
         "or elicits sympathy towards it. Respond with only the label.\n\n"
         "Text: {text}";
}

// ---------------------------------------------------------------------------
// Annotator clients.
// ---------------------------------------------------------------------------

class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual std::string name() const = 0;
  // Returns the raw label text for (prompt, text). Throws on failure.
  virtual std::string annotate(const std::string& prompt,
                               const std::string& text) = 0;
};

// Deterministic offline annotator. For domain texts generated by the
// simulator ("news3.example") it recovers the category from the domain
// name; anything unrecognized falls back to Reference.
class StubAnnotator : public Annotator {
 public:
  std::string name() const override { return "stub"; }

  std::string annotate(const std::string&, const std::string& text) override {
    ++calls_;
    std::string host = text;
    auto dot = host.find('.');
    std::string leaf = dot == std::string::npos ? host : host.substr(0, dot);
    while (!leaf.empty() &&
           std::isdigit(static_cast<unsigned char>(leaf.back())))
      leaf.pop_back();
    for (const std::string& c : vocab::all_categories())
      if (vocab::category_slug(c) == leaf) return c;
    return "Reference";
  }

  int calls() const { return calls_.load(); }

 private:
  std::atomic<int> calls_{0};
};

// HTTP annotator: POST {prompt, text} to the configured URL, expects
// {"label": "..."} back.
class HttpAnnotator : public Annotator {
 public:
  explicit HttpAnnotator(std::string url, int timeout_s = 10, int retries = 2)
      : url_(std::move(url)), timeout_s_(timeout_s), retries_(retries) {}

  std::string name() const override { return "http:" + url_; }

  std::string annotate(const std::string& prompt,
                       const std::string& text) override {
    auto [origin, path] = crawl::split_url(url_);
    nlohmann::ordered_json body;
    body["prompt"] = prompt;
    body["text"] = text;
    std::string payload = body.dump();
    for (int attempt = 0; attempt <= retries_; ++attempt) {
      httplib::Client client(origin);
      client.set_connection_timeout(timeout_s_);
      client.set_read_timeout(timeout_s_);
      auto res = client.Post(path, payload, "application/json");
      if (res && res->status == 200) {
        nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
        if (!j.is_discarded() && j.contains("label") && j["label"].is_string())
          return j["label"].get<std::string>();
        throw Error("annotator returned malformed body: " + res->body);
      }
    }
    throw Error("annotator unreachable at " + url_);
  }

 private:
  std::string url_;
  int timeout_s_;
  int retries_;
};

// ---------------------------------------------------------------------------
// Category map.
// ---------------------------------------------------------------------------

enum class LabelSource { kAuto, kManualVerified };

struct CategoryEntry {
  std::string category;
  LabelSource source = LabelSource::kAuto;

  friend bool operator==(const CategoryEntry&, const CategoryEntry&) = default;
};

using CategoryMap = std::map<std::string, CategoryEntry>;

inline std::map<std::string, std::string> plain_category_map(
    const CategoryMap& m) {
  std::map<std::string, std::string> out;
  for (const auto& [domain, entry] : m) out[domain] = entry.category;
  return out;
}

// Overrides file: TSV rows of (domain, category).
inline std::map<std::string, std::string> load_overrides(
    const std::string& path) {
  std::map<std::string, std::string> out;
  if (path.empty()) return out;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open overrides: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string domain, category;
    if (!std::getline(fields, domain, '\t') || !std::getline(fields, category))
      throw ParseError("override row needs 2 tab-separated fields", line_no);
    try {
      out[domain] = vocab::category_from_response(category);
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

// Maps every domain to a vocabulary category. Annotator responses are
// cached in cache_dir (one file per (domain, prompt) hash) so a warm cache
// makes zero external calls; manual overrides win last. Out-of-vocabulary
// responses and unreachable-annotator failures are collected into one
// error.
inline CategoryMap categorize_domains(const std::vector<std::string>& domains,
                                      Annotator& annotator,
                                      const std::string& cache_dir,
                                      const std::string& overrides_path = "",
                                      int max_concurrency = 1) {
  namespace fs = std::filesystem;
  if (max_concurrency < 1)
    throw Error("max_concurrency must be >= 1");
  if (!cache_dir.empty()) fs::create_directories(cache_dir);
  const std::string prompt = domain_prompt();
  const std::uint64_t prompt_hash = rng::fnv1a64(prompt);

  std::set<std::string> unique(domains.begin(), domains.end());
  std::vector<std::string> ordered(unique.begin(), unique.end());

  auto cache_path = [&](const std::string& domain) {
    return fs::path(cache_dir) /
           (sim::detail::hex16(rng::fnv1a64(domain) ^ prompt_hash) + ".txt");
  };

  CategoryMap out;
  std::vector<std::string> missing;
  for (const std::string& domain : ordered) {
    if (!cache_dir.empty() && fs::exists(cache_path(domain))) {
      std::ifstream in(cache_path(domain), std::ios::binary);
      std::string response((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
      out[domain] = CategoryEntry{vocab::category_from_response(response),
                                  LabelSource::kAuto};
    } else {
      missing.push_back(domain);
    }
  }

  std::vector<std::string> failed;
  for (std::size_t base = 0; base < missing.size();
       base += static_cast<std::size_t>(max_concurrency)) {
    std::size_t end = std::min(missing.size(),
                               base + static_cast<std::size_t>(
                                          max_concurrency));
    std::vector<std::future<std::string>> batch;
    for (std::size_t i = base; i < end; ++i)
      batch.push_back(std::async(std::launch::async, [&, i] {
        return annotator.annotate(prompt, missing[i]);
      }));
    for (std::size_t i = base; i < end; ++i) {
      try {
        std::string response = batch[i - base].get();
        out[missing[i]] = CategoryEntry{
            vocab::category_from_response(response), LabelSource::kAuto};
        if (!cache_dir.empty()) {
          std::ofstream cache(cache_path(missing[i]),
                              std::ios::binary | std::ios::trunc);
          cache << response;
        }
      } catch (const Error&) {
        failed.push_back(missing[i]);
      }
    }
  }
  if (!failed.empty()) {
    std::string list;
    for (const std::string& d : failed) list += " " + d;
    throw Error("uncategorized domains:" + list);
  }

  for (const auto& [domain, category] : load_overrides(overrides_path))
    out[domain] = CategoryEntry{category, LabelSource::kManualVerified};
  return out;
}

inline void save_category_map(const CategoryMap& map,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write category map: " + path);
  out << "# domain\tcategory\tsource\n";
  for (const auto& [domain, entry] : map)
    out << domain << '\t' << entry.category << '\t'
        << (entry.source == LabelSource::kManualVerified ? "manual_verified"
                                                         : "auto")
        << '\n';
}

inline CategoryMap load_category_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open category map: " + path);
  CategoryMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string domain, category, source;
    if (!std::getline(fields, domain, '\t') ||
        !std::getline(fields, category, '\t') ||
        !std::getline(fields, source))
      throw ParseError("category map row needs 3 tab-separated fields",
                       line_no);
    if (!vocab::is_known_category(category))
      throw ParseError("unknown category '" + category + "'", line_no);
    if (source != "auto" && source != "manual_verified")
      throw ParseError("unknown source '" + source + "'", line_no);
    out[domain] = CategoryEntry{category, source == "manual_verified"
                                              ? LabelSource::kManualVerified
                                              : LabelSource::kAuto};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Article preparation.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string lower_ascii(std::string s) {
  for (char& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::string strip_tags(const std::string& html) {
  std::string out;
  bool in_tag = false;
  for (char c : html) {
    if (c == '<') {
      in_tag = true;
      out.push_back(' ');
    } else if (c == '>') {
      in_tag = false;
    } else if (!in_tag) {
      out.push_back(c);
    }
  }
  return out;
}

inline std::string remove_all_ci(std::string text, const std::string& needle) {
  if (needle.empty()) return text;
  std::string lower_text = annotate::detail::lower_ascii(text);
  std::string lower_needle = annotate::detail::lower_ascii(needle);
  std::size_t pos;
  while ((pos = lower_text.find(lower_needle)) != std::string::npos) {
    text.erase(pos, needle.size());
    lower_text.erase(pos, needle.size());
  }
  return text;
}

inline std::string collapse_whitespace(const std::string& text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace detail

using TranslateFn = std::string (*)(const std::string&);

inline std::string identity_translate(const std::string& s) { return s; }

// Produces "title\n\nbody" from a fetched document with all mentions of
// the source host and registrable domain removed. HTML tags are stripped;
// plain-text documents use their first line as the title. The translation
// pass is pluggable and identity by default.
inline std::string prepare_article(const std::string& url,
                                   const std::string& raw,
                                   TranslateFn translate = identity_translate) {
  std::string title;
  std::string body;
  std::string lower = annotate::detail::lower_ascii(raw);
  std::size_t topen = lower.find("<title>");
  std::size_t tclose = lower.find("</title>");
  if (topen != std::string::npos && tclose != std::string::npos &&
      tclose > topen) {
    title = raw.substr(topen + 7, tclose - (topen + 7));
    std::string rest = raw.substr(0, topen) + raw.substr(tclose + 8);
    body = detail::strip_tags(rest);
  } else if (raw.find('<') != std::string::npos &&
             raw.find('>') != std::string::npos) {
    body = detail::strip_tags(raw);
  } else {
    std::size_t nl = raw.find('\n');
    title = nl == std::string::npos ? raw : raw.substr(0, nl);
    body = nl == std::string::npos ? "" : raw.substr(nl + 1);
  }

  std::string host = host_of_url(url);
  std::string domain = registrable_domain(url);
  for (std::string* part : {&title, &body}) {
    *part = detail::remove_all_ci(*part, host);
    *part = detail::remove_all_ci(*part, domain);
    *part = detail::collapse_whitespace(*part);
  }
  if (body.empty()) throw Error("empty article extraction for " + url);
  std::string text = title.empty() ? body : title + "\n\n" + body;
  return translate(text);
}

// ---------------------------------------------------------------------------
// Leaning labels, consensus, and aggregation.
// ---------------------------------------------------------------------------

enum class CoderKind { kMachine, kHuman };

struct LeaningLabel {
  std::string url;
  std::string coder_id;
  CoderKind coder_kind = CoderKind::kHuman;
  vocab::Leaning label = vocab::Leaning::kNeutral;
  std::string survey_id;
};

// Labels import file: TSV rows of (url, coder_id, coder_kind, label,
// survey_id, attention_pass). Rows failing the attention check are dropped
// at load time; duplicate (url, coder_id) rows are rejected.
inline std::vector<LeaningLabel> load_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open labels: " + path);
  std::vector<LeaningLabel> out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string url, coder, kind, label, survey, attention;
    if (!std::getline(fields, url, '\t') ||
        !std::getline(fields, coder, '\t') ||
        !std::getline(fields, kind, '\t') ||
        !std::getline(fields, label, '\t') ||
        !std::getline(fields, survey, '\t') ||
        !std::getline(fields, attention))
      throw ParseError("label row needs 6 tab-separated fields", line_no);
    if (attention != "0" && attention != "1")
      throw ParseError("attention_pass must be 0 or 1", line_no);
    if (attention == "0") continue;
    if (kind != "machine" && kind != "human")
      throw ParseError("coder_kind must be machine or human", line_no);
    if (!seen.insert({url, coder}).second)
      throw ParseError("duplicate label for (" + url + ", " + coder + ")",
                       line_no);
    LeaningLabel l;
    l.url = url;
    l.coder_id = coder;
    l.coder_kind = kind == "machine" ? CoderKind::kMachine : CoderKind::kHuman;
    try {
      l.label = vocab::leaning_from_string(label);
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
    l.survey_id = survey;
    out.push_back(std::move(l));
  }
  return out;
}

// A URL resolves to label L iff L is the unique most-voted label among
// human coders and has at least min_agree votes (with collapse_sides the
// vote is over pro-Israel / neutral / pro-Palestine sides; the resolved
// label is then the side's most common exact label). Ties stay
// unresolved. Machine labels never participate. Order-invariant.
inline std::map<std::string, std::optional<vocab::Leaning>> consensus(
    const std::vector<LeaningLabel>& labels, int min_agree = 2,
    bool collapse_sides = false) {
  if (min_agree < 1) throw Error("min_agree must be >= 1");
  std::map<std::string, std::array<int, vocab::kLeaningCount>> counts;
  for (const LeaningLabel& l : labels) {
    if (l.coder_kind != CoderKind::kHuman) continue;
    auto [it, inserted] = counts.try_emplace(l.url);
    if (inserted) it->second.fill(0);
    ++it->second[static_cast<std::size_t>(vocab::leaning_index(l.label))];
  }
  // Unique argmax with count >= min_agree, or nothing.
  auto winner = [min_agree](const std::vector<std::pair<int, int>>& votes)
      -> std::optional<int> {
    int best_key = -1, best_count = 0, ties = 0;
    for (auto [key, count] : votes) {
      if (count > best_count) {
        best_key = key;
        best_count = count;
        ties = 1;
      } else if (count == best_count && count > 0) {
        ++ties;
      }
    }
    if (best_count >= min_agree && ties == 1) return best_key;
    return std::nullopt;
  };
  std::map<std::string, std::optional<vocab::Leaning>> out;
  for (const auto& [url, by_label] : counts) {
    std::optional<vocab::Leaning> resolved;
    if (collapse_sides) {
      std::vector<std::pair<int, int>> side_votes;
      for (int side : {-1, 0, 1}) {
        int total = 0;
        for (vocab::Leaning l : vocab::all_leanings())
          if (vocab::leaning_side(l) == side)
            total +=
                by_label[static_cast<std::size_t>(vocab::leaning_index(l))];
        side_votes.emplace_back(side, total);
      }
      if (auto side = winner(side_votes)) {
        int best = -1;
        for (vocab::Leaning l : vocab::all_leanings()) {
          if (vocab::leaning_side(l) != *side) continue;
          int idx = vocab::leaning_index(l);
          if (best < 0 || by_label[static_cast<std::size_t>(idx)] >
                              by_label[static_cast<std::size_t>(best)])
            best = idx;
        }
        resolved = static_cast<vocab::Leaning>(best);
      }
    } else {
      std::vector<std::pair<int, int>> votes;
      for (vocab::Leaning l : vocab::all_leanings()) {
        int idx = vocab::leaning_index(l);
        votes.emplace_back(idx, by_label[static_cast<std::size_t>(idx)]);
      }
      if (auto idx = winner(votes))
        resolved = static_cast<vocab::Leaning>(*idx);
    }
    out[url] = resolved;
  }
  return out;
}

enum class Scope { kAll, kTop3 };

struct LeaningCell {
  std::string engine;
  std::string location;
  std::array<double, vocab::kLeaningCount> proportions{};
  int denominator = 0;
};

struct LeaningPanel {
  Scope scope = Scope::kAll;
  std::vector<LeaningCell> cells;
  std::vector<std::string> notes;  // omitted cells
};

// Per (engine, location): share of each leaning among resolved News
// results, restricted to rank <= 3 under Scope::kTop3. Unresolved or
// unlabeled results stay out of the denominator; empty cells are omitted
// with a note.
inline LeaningPanel leaning_proportions(
    const std::vector<SerpRecord>& log,
    const std::map<std::string, std::optional<vocab::Leaning>>& resolved,
    const std::map<std::string, std::string>& catmap, Scope scope) {
  struct Key {
    std::string engine;
    std::string location;
    bool operator<(const Key& o) const {
      return std::tie(engine, location) < std::tie(o.engine, o.location);
    }
  };
  std::map<Key, std::array<int, vocab::kLeaningCount>> counts;
  std::set<Key> seen;
  for (const SerpRecord& r : log) {
    Key key{r.engine, r.location};
    seen.insert(key);
    if (r.status != FetchStatus::kOk) continue;
    for (const RankedResult& res : r.results) {
      if (scope == Scope::kTop3 && res.rank > 3) continue;
      auto cat = catmap.find(res.domain);
      if (cat == catmap.end() || cat->second != "News") continue;
      auto lab = resolved.find(res.url);
      if (lab == resolved.end() || !lab->second.has_value()) continue;
      auto [it, inserted] = counts.try_emplace(key);
      if (inserted) it->second.fill(0);
      ++it->second[static_cast<std::size_t>(
          vocab::leaning_index(*lab->second))];
    }
  }
  LeaningPanel panel;
  panel.scope = scope;
  for (const Key& key : seen) {
    auto it = counts.find(key);
    int total = 0;
    if (it != counts.end())
      for (int c : it->second) total += c;
    if (total == 0) {
      panel.notes.push_back("cell omitted (no resolved News results): " +
                            key.engine + "/" + key.location);
      continue;
    }
    LeaningCell cell;
    cell.engine = key.engine;
    cell.location = key.location;
    cell.denominator = total;
    for (int i = 0; i < vocab::kLeaningCount; ++i)
      cell.proportions[static_cast<std::size_t>(i)] =
          static_cast<double>(it->second[static_cast<std::size_t>(i)]) /
          static_cast<double>(total);
    panel.cells.push_back(std::move(cell));
  }
  return panel;
}

// Row-normalized confusion matrix: rows = machine label, columns = human
// label, over (machine, human) label pairs sharing a URL. Errors when the
// label sets share no URL.
inline std::array<std::array<double, vocab::kLeaningCount>,
                  vocab::kLeaningCount>
agreement_matrix(const std::vector<LeaningLabel>& machine_labels,
                 const std::vector<LeaningLabel>& human_labels) {
  std::map<std::string, std::vector<vocab::Leaning>> humans;
  for (const LeaningLabel& l : human_labels)
    if (l.coder_kind == CoderKind::kHuman) humans[l.url].push_back(l.label);
  std::array<std::array<int, vocab::kLeaningCount>, vocab::kLeaningCount>
      counts{};
  bool overlap = false;
  for (const LeaningLabel& m : machine_labels) {
    if (m.coder_kind != CoderKind::kMachine) continue;
    auto it = humans.find(m.url);
    if (it == humans.end()) continue;
    overlap = true;
    for (vocab::Leaning h : it->second)
      ++counts[static_cast<std::size_t>(vocab::leaning_index(m.label))]
              [static_cast<std::size_t>(vocab::leaning_index(h))];
  }
  if (!overlap)
    throw Error("agreement_matrix: no URL overlap between label sets");
  std::array<std::array<double, vocab::kLeaningCount>, vocab::kLeaningCount>
      out{};
  for (std::size_t i = 0; i < vocab::kLeaningCount; ++i) {
    int row_total = 0;
    for (int c : counts[i]) row_total += c;
    if (row_total == 0) continue;
    for (std::size_t j = 0; j < vocab::kLeaningCount; ++j)
      out[i][j] = static_cast<double>(counts[i][j]) /
                  static_cast<double>(row_total);
  }
  return out;
}

}  // namespace serpaudit::annotate

#endif  // SERPAUDIT_ANNOTATE_HPP
