// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Canonical on-disk audit log: one UTF-8 JSON object per line, fixed field
// order, version-tagged. Lines are independently parseable; the writer is
// append-only and emits each line with a single write call.

#ifndef SERPAUDIT_SERP_LOG_HPP
#define SERPAUDIT_SERP_LOG_HPP

#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "serpaudit/errors.hpp"
#include "serpaudit/model.hpp"

namespace serpaudit {

inline constexpr int kSerpLogVersion = 1;

// Serializes one record as a single line (no trailing newline). Field order
// is part of the format: v, audit_id, engine, bot_id, bot_type, location,
// language, history_kind, query_text, query_category, timestamp_ms, status,
// results.
inline std::string serialize_serp_record(const SerpRecord& r) {
  validate(r);
  nlohmann::ordered_json j;
  j["v"] = kSerpLogVersion;
  j["audit_id"] = r.audit_id;
  j["engine"] = r.engine;
  j["bot_id"] = r.bot_id;
  j["bot_type"] = to_string(r.bot_type);
  j["location"] = r.location;
  j["language"] = r.language;
  j["history_kind"] = to_string(r.history_kind);
  j["query_text"] = r.query.text;
  j["query_category"] = to_string(r.query.category);
  j["timestamp_ms"] = r.timestamp_ms;
  j["status"] = to_string(r.status);
  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  for (const RankedResult& res : r.results) {
    nlohmann::ordered_json item;
    item["rank"] = res.rank;
    item["url"] = res.url;
    item["domain"] = res.domain;
    item["title"] = res.title;
    item["snippet"] = res.snippet;
    results.push_back(std::move(item));
  }
  j["results"] = std::move(results);
  return j.dump();
}

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j,
                                           const char* name) {
  auto it = j.find(name);
  if (it == j.end())
    throw ParseError(std::string("missing field '") + name + "'");
  return *it;
}

inline std::string require_string(const nlohmann::json& j, const char* name) {
  const nlohmann::json& v = require_field(j, name);
  if (!v.is_string())
    throw ParseError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

// Parses one log line. Unknown versions raise VersionError; anything else
// wrong with the line raises ParseError.
inline SerpRecord parse_serp_record(std::string_view line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr,
                                           /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ParseError("line is not valid JSON");
  if (!j.is_object()) throw ParseError("line is not a JSON object");
  const nlohmann::json& v = detail::require_field(j, "v");
  if (!v.is_number_integer() || v.get<int>() != kSerpLogVersion)
    throw VersionError("unsupported log version " + v.dump());

  SerpRecord r;
  r.audit_id = detail::require_string(j, "audit_id");
  r.engine = detail::require_string(j, "engine");
  r.bot_id = detail::require_string(j, "bot_id");
  r.bot_type = bot_type_from_string(detail::require_string(j, "bot_type"));
  r.location = detail::require_string(j, "location");
  r.language = detail::require_string(j, "language");
  r.history_kind =
      history_kind_from_string(detail::require_string(j, "history_kind"));
  r.query = make_query(
      detail::require_string(j, "query_text"),
      query_category_from_string(detail::require_string(j, "query_category")));
  const nlohmann::json& ts = detail::require_field(j, "timestamp_ms");
  if (!ts.is_number_integer())
    throw ParseError("field 'timestamp_ms' must be an integer");
  r.timestamp_ms = ts.get<std::int64_t>();
  r.status = fetch_status_from_string(detail::require_string(j, "status"));
  const nlohmann::json& results = detail::require_field(j, "results");
  if (!results.is_array()) throw ParseError("field 'results' must be an array");
  for (const nlohmann::json& item : results) {
    if (!item.is_object()) throw ParseError("result entry must be an object");
    RankedResult res;
    const nlohmann::json& rank = detail::require_field(item, "rank");
    if (!rank.is_number_integer())
      throw ParseError("result field 'rank' must be an integer");
    res.rank = rank.get<int>();
    res.url = detail::require_string(item, "url");
    res.domain = detail::require_string(item, "domain");
    res.title = detail::require_string(item, "title");
    res.snippet = detail::require_string(item, "snippet");
    r.results.push_back(std::move(res));
  }
  try {
    validate(r);
  } catch (const Error& e) {
    throw ParseError(std::string("invalid record: ") + e.what());
  }
  return r;
}

// Streaming writer. Each line is assembled in memory and written with one
// stream insertion so a crash cannot leave a partial line followed by more
// output from this writer.
class SerpLogWriter {
 public:
  explicit SerpLogWriter(const std::string& path)
      : out_(path, std::ios::binary | std::ios::app) {
    if (!out_) throw Error("cannot open log for writing: " + path);
  }

  void write(const SerpRecord& r) {
    std::string line = serialize_serp_record(r);
    line.push_back('\n');
    if (!(out_ << line)) throw Error("log write failed");
    out_.flush();
    if (!out_) throw Error("log flush failed");
    ++count_;
  }

  std::size_t count() const { return count_; }

 private:
  std::ofstream out_;
  std::size_t count_ = 0;
};

inline std::size_t write_serp_log(const std::vector<SerpRecord>& records,
                                  const std::string& path) {
  SerpLogWriter writer(path);
  for (const SerpRecord& r : records) writer.write(r);
  return writer.count();
}

// Applies fn to each record in file order. Errors carry the 1-based line
// number. A final line with no terminating newline is treated as truncated.
inline void for_each_serp_record(
    const std::string& path,
    const std::function<void(const SerpRecord&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open log for reading: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (in.eof())
      throw ParseError("truncated final line", line_no);
    try {
      fn(parse_serp_record(line));
    } catch (const VersionError&) {
      throw;
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()), line_no);
    }
  }
}

inline std::vector<SerpRecord> read_serp_log(const std::string& path) {
  std::vector<SerpRecord> out;
  for_each_serp_record(path, [&](const SerpRecord& r) { out.push_back(r); });
  return out;
}

}  // namespace serpaudit

#endif  // SERPAUDIT_SERP_LOG_HPP
