// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Search-engine access behind one interface: an in-process simulator client,
// an HTTP client for a served simulator, and a selector-config-driven HTML
// client for live engines. Only simulator clients run in CI.

#ifndef SERPAUDIT_ENGINE_CLIENT_HPP
#define SERPAUDIT_ENGINE_CLIENT_HPP

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "serpaudit/domain.hpp"
#include "serpaudit/errors.hpp"
#include "serpaudit/model.hpp"
#include "serpaudit/simengine.hpp"

namespace serpaudit::crawl {

// Raised when the engine as a whole is unreachable; the orchestrator stops
// auditing that engine and moves on to the next one.
class EngineOutage : public Error {
 public:
  using Error::Error;
};

// Wall-clock abstraction so audits are instant and reproducible under test.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
  // Moves shared audit time forward (sleeps on the real clock).
  virtual void advance_ms(std::int64_t ms) = 0;
  // Per-worker delay before a dispatch; a virtual clock ignores it because
  // the dispatch timestamp is scheduled, not measured.
  virtual void worker_sleep_ms(std::int64_t ms) = 0;
};

class SimClock : public Clock {
 public:
  explicit SimClock(std::int64_t start_ms = 1704067200000)  // 2024-01-01
      : now_(start_ms) {}
  std::int64_t now_ms() override { return now_; }
  void advance_ms(std::int64_t ms) override { now_ += ms; }
  void worker_sleep_ms(std::int64_t) override {}

 private:
  std::int64_t now_;
};

class RealClock : public Clock {
 public:
  std::int64_t now_ms() override {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
  void advance_ms(std::int64_t ms) override { sleep(ms); }
  void worker_sleep_ms(std::int64_t ms) override { sleep(ms); }

 private:
  static void sleep(std::int64_t ms) {
    std::this_thread::sleep_for(std::chrono::milliseconds(ms));
  }
};

// One fresh browser session: starts as a copy of the profile's warm-up jar
// and may collect cookies the engine sets during the session.
struct Session {
  std::vector<Cookie> cookies;
};

struct SerpFetch {
  FetchStatus status = FetchStatus::kOk;
  std::vector<RankedResult> results;
};

class EngineClient {
 public:
  virtual ~EngineClient() = default;
  virtual std::string name() const = 0;
  // Never mutates profile; may append engine-set cookies to the session.
  virtual SerpFetch search(const Query& q, const BotProfile& profile,
                           Session& session) = 0;
  virtual std::string fetch_page(const std::string& url,
                                 const BotProfile& profile) = 0;
};

// ---------------------------------------------------------------------------
// In-process simulator client.
// ---------------------------------------------------------------------------

class InProcessSimClient : public EngineClient {
 public:
  InProcessSimClient(const sim::SimEngine& engine, std::string name)
      : engine_(engine), name_(std::move(name)) {}

  std::string name() const override { return name_; }

  SerpFetch search(const Query& q, const BotProfile& profile,
                   Session& session) override {
    sim::RequestContext ctx;
    ctx.location = profile.location;
    ctx.language = profile.language;
    ctx.history_topics =
        sim::SimEngine::history_topics_from_cookies(session.cookies);
    sim::SearchResponse resp = engine_.search(q.text, ctx);
    // An empty result list cannot be stored as Ok; treat it as a parse
    // failure so the audit keeps the attempt with a non-Ok status.
    if (!resp.known_query || resp.results.empty())
      return SerpFetch{FetchStatus::kParseFailure, {}};
    return SerpFetch{FetchStatus::kOk, std::move(resp.results)};
  }

  std::string fetch_page(const std::string& url, const BotProfile&) override {
    std::string doc_id = url.substr(url.rfind('/') + 1);
    const sim::SynthDoc* d = engine_.find_doc(doc_id);
    if (d == nullptr) throw Error("unknown document url: " + url);
    return d->body;
  }

 private:
  const sim::SimEngine& engine_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// HTTP clients.
// ---------------------------------------------------------------------------

inline std::string url_encode(std::string_view s) {
  static const char* kHex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    bool unreserved = std::isalnum(c) || c == '-' || c == '_' || c == '.' ||
                      c == '~';
    if (unreserved) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

inline std::string cookie_header(const std::vector<Cookie>& cookies) {
  std::string out;
  for (const Cookie& c : cookies) {
    if (!out.empty()) out += "; ";
    out += c.name + "=" + c.value;
  }
  return out;
}

// Splits an absolute URL into (origin, path-and-query) for httplib.
inline std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error("not an absolute URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// Applies PROXY_URL (or an explicit proxy) to an httplib client.
inline void apply_proxy(httplib::Client& client,
                        const std::string& proxy_url) {
  if (proxy_url.empty()) return;
  auto [origin, path] = split_url(proxy_url);
  (void)path;
  auto host_start = origin.find("://") + 3;
  std::string hostport = origin.substr(host_start);
  auto colon = hostport.rfind(':');
  if (colon == std::string::npos)
    throw Error("proxy URL needs host:port, got " + proxy_url);
  client.set_proxy(hostport.substr(0, colon).c_str(),
                   std::stoi(hostport.substr(colon + 1)));
}

// Client for a served simulator (sim_server endpoints).
class HttpSimClient : public EngineClient {
 public:
  HttpSimClient(std::string base_url, std::string name,
                std::string proxy_url = "")
      : base_url_(std::move(base_url)), name_(std::move(name)),
        proxy_url_(std::move(proxy_url)) {}

  std::string name() const override { return name_; }

  SerpFetch search(const Query& q, const BotProfile& profile,
                   Session& session) override {
    httplib::Client client(base_url_);
    client.set_connection_timeout(5);
    apply_proxy(client, proxy_url_);
    httplib::Headers headers;
    if (!session.cookies.empty())
      headers.emplace("Cookie", cookie_header(session.cookies));
    std::string path = "/search?q=" + url_encode(q.text) +
                       "&loc=" + url_encode(profile.location) +
                       "&lang=" + url_encode(profile.language);
    auto res = client.Get(path, headers);
    if (!res) throw EngineOutage("engine " + name_ + " unreachable at " +
                                 base_url_);
    if (res->status == 403 || res->status == 429)
      return SerpFetch{FetchStatus::kCaptchaBlocked, {}};
    if (res->status != 200) return SerpFetch{FetchStatus::kTimeout, {}};
    return parse_serp_json(res->body);
  }

  std::string fetch_page(const std::string& url, const BotProfile&) override {
    httplib::Client client(base_url_);
    apply_proxy(client, proxy_url_);
    auto [origin, path] = split_url(url);
    auto res = client.Get(path);
    if (!res || res->status != 200)
      throw Error("page fetch failed: " + url);
    return res->body;
  }

  static SerpFetch parse_serp_json(const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("results") ||
        !j["results"].is_array())
      return SerpFetch{FetchStatus::kParseFailure, {}};
    SerpFetch fetch;
    for (const nlohmann::json& item : j["results"]) {
      RankedResult r;
      r.rank = item.value("rank", 0);
      r.url = item.value("url", "");
      r.domain = item.value("domain", "");
      r.title = item.value("title", "");
      r.snippet = item.value("snippet", "");
      fetch.results.push_back(std::move(r));
    }
    if (fetch.results.empty())
      return SerpFetch{FetchStatus::kParseFailure, {}};
    fetch.status = FetchStatus::kOk;
    return fetch;
  }

 private:
  std::string base_url_;
  std::string name_;
  std::string proxy_url_;
};

// ---------------------------------------------------------------------------
// Live-engine HTML client, driven by a per-engine selector config. Never
// exercised against real engines in CI; the parsing path is unit-tested on
// canned HTML.
// ---------------------------------------------------------------------------

struct SelectorConfig {
  std::string engine;            // engine name, e.g. "duckgo"
  std::string url_template;      // "{query}" is replaced, percent-encoded
  std::string result_pattern;    // regex; captures: 1=url, 2=title, 3=snippet
  std::string block_pattern;     // regex marking a CAPTCHA/blocked page
  std::string user_agent;
  std::string accept_language;   // "{lang}" is replaced
};

inline SelectorConfig load_selector_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open selector config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("selector config " + path + ": " + e.what());
  }
  SelectorConfig cfg;
  cfg.engine = j.value("engine", "");
  cfg.url_template = j.value("url_template", "");
  cfg.result_pattern = j.value("result_pattern", "");
  cfg.block_pattern = j.value("block_pattern", "");
  cfg.user_agent = j.value("user_agent", "serpaudit/1.0");
  cfg.accept_language = j.value("accept_language", "{lang}");
  if (cfg.engine.empty() || cfg.url_template.empty() ||
      cfg.result_pattern.empty())
    throw Error("selector config " + path +
                " needs engine, url_template, result_pattern");
  return cfg;
}

inline std::string replace_all(std::string s, const std::string& from,
                               const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

// Extracts ranked results from an HTML page with the config's regex.
// Duplicate URLs keep their first (best-ranked) occurrence.
inline SerpFetch parse_live_html(const SelectorConfig& cfg,
                                 const std::string& html) {
  if (!cfg.block_pattern.empty()) {
    std::regex block(cfg.block_pattern);
    if (std::regex_search(html, block))
      return SerpFetch{FetchStatus::kCaptchaBlocked, {}};
  }
  std::regex pattern(cfg.result_pattern);
  SerpFetch fetch;
  std::vector<std::string> seen;
  for (auto it = std::sregex_iterator(html.begin(), html.end(), pattern);
       it != std::sregex_iterator(); ++it) {
    const std::smatch& m = *it;
    std::string url = m.size() > 1 ? m[1].str() : "";
    std::string domain;
    try {
      domain = registrable_domain(url);
    } catch (const Error&) {
      continue;  // skip non-http(s) or malformed hrefs
    }
    if (std::find(seen.begin(), seen.end(), url) != seen.end()) continue;
    seen.push_back(url);
    RankedResult r;
    r.rank = static_cast<int>(fetch.results.size()) + 1;
    r.url = url;
    r.domain = domain;
    r.title = m.size() > 2 ? m[2].str() : "";
    r.snippet = m.size() > 3 ? m[3].str() : "";
    fetch.results.push_back(std::move(r));
  }
  if (fetch.results.empty()) return SerpFetch{FetchStatus::kParseFailure, {}};
  fetch.status = FetchStatus::kOk;
  return fetch;
}

class LiveHtmlClient : public EngineClient {
 public:
  explicit LiveHtmlClient(SelectorConfig cfg, std::string proxy_url = "")
      : cfg_(std::move(cfg)), proxy_url_(std::move(proxy_url)) {}

  std::string name() const override { return cfg_.engine; }

  SerpFetch search(const Query& q, const BotProfile& profile,
                   Session& session) override {
    std::string url = replace_all(cfg_.url_template, "{query}",
                                  url_encode(q.text));
    auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    client.set_connection_timeout(10);
    apply_proxy(client, proxy_url_);
    httplib::Headers headers;
    headers.emplace("User-Agent", cfg_.user_agent);
    headers.emplace("Accept-Language",
                    replace_all(cfg_.accept_language, "{lang}",
                                profile.language));
    if (!session.cookies.empty())
      headers.emplace("Cookie", cookie_header(session.cookies));
    auto res = client.Get(path, headers);
    if (!res)
      throw EngineOutage("engine " + cfg_.engine + " unreachable");
    if (res->status == 403 || res->status == 429)
      return SerpFetch{FetchStatus::kCaptchaBlocked, {}};
    if (res->status != 200) return SerpFetch{FetchStatus::kTimeout, {}};
    return parse_live_html(cfg_, res->body);
  }

  std::string fetch_page(const std::string& url, const BotProfile&) override {
    auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    apply_proxy(client, proxy_url_);
    httplib::Headers headers;
    headers.emplace("User-Agent", cfg_.user_agent);
    auto res = client.Get(path, headers);
    if (!res || res->status != 200)
      throw Error("page fetch failed: " + url);
    return res->body;
  }

 private:
  SelectorConfig cfg_;
  std::string proxy_url_;
};

// ---------------------------------------------------------------------------
// Content fetchers for warm-up visits (need Set-Cookie visibility).
// ---------------------------------------------------------------------------

struct FetchResult {
  bool ok = false;
  std::string body;
  std::vector<Cookie> set_cookies;
};

class ContentFetcher {
 public:
  virtual ~ContentFetcher() = default;
  virtual FetchResult fetch(const std::string& url) = 0;
};

class InProcessSimFetcher : public ContentFetcher {
 public:
  explicit InProcessSimFetcher(const sim::SimEngine& engine)
      : engine_(engine) {}

  FetchResult fetch(const std::string& url) override {
    std::string host = host_of_url(url);
    auto [origin, path] = split_url(url);
    FetchResult out;
    if (path.rfind("/track/", 0) == 0) {
      try {
        sim::TrackResponse t = engine_.track(path.substr(7));
        out.ok = true;
        out.body = t.body;
        out.set_cookies.push_back(
            Cookie{t.cookie_name, t.cookie_value, host});
      } catch (const Error&) {
        out.ok = false;
      }
      return out;
    }
    if (path.rfind("/page/", 0) == 0) {
      const sim::SynthDoc* d = engine_.find_doc(path.substr(6));
      if (d != nullptr) {
        out.ok = true;
        out.body = d->body;
      }
      return out;
    }
    return out;
  }

 private:
  const sim::SimEngine& engine_;
};

class HttpFetcher : public ContentFetcher {
 public:
  explicit HttpFetcher(std::string proxy_url = "")
      : proxy_url_(std::move(proxy_url)) {}

  FetchResult fetch(const std::string& url) override {
    FetchResult out;
    std::pair<std::string, std::string> parts;
    try {
      parts = split_url(url);
    } catch (const Error&) {
      return out;
    }
    httplib::Client client(parts.first);
    client.set_connection_timeout(10);
    apply_proxy(client, proxy_url_);
    auto res = client.Get(parts.second);
    if (!res || res->status != 200) return out;
    out.ok = true;
    out.body = res->body;
    std::string host = host_of_url(url);
    auto range = res->headers.equal_range("Set-Cookie");
    for (auto it = range.first; it != range.second; ++it) {
      std::string header = it->second;
      std::size_t semi = header.find(';');
      std::string pair = header.substr(0, semi);
      std::size_t eq = pair.find('=');
      if (eq != std::string::npos && eq > 0)
        out.set_cookies.push_back(
            Cookie{pair.substr(0, eq), pair.substr(eq + 1), host});
    }
    return out;
  }

 private:
  std::string proxy_url_;
};

}  // namespace serpaudit::crawl

#endif  // SERPAUDIT_ENGINE_CLIENT_HPP
