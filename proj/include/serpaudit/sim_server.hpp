// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// HTTP facade over SimEngine:
//   GET /search?q=&loc=&lang=   SERP JSON (cookies read from the header)
//   GET /page/{doc_id}          article body, 404 if unknown
//   GET /track/{topic...}       filler page + deterministic topic cookie
//   GET /truth/{doc_id}         ground truth, 403 unless enabled
//   GET /healthz                liveness probe
// Every response carries x-content-hash (fnv1a64 of the body) so golden
// tests can compare responses without storing full bodies.

#ifndef SERPAUDIT_SIM_SERVER_HPP
#define SERPAUDIT_SIM_SERVER_HPP

#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "serpaudit/model.hpp"
#include "serpaudit/rng.hpp"
#include "serpaudit/simengine.hpp"

namespace serpaudit::sim {

// Parses a Cookie request header ("a=1; b=2") into name/value pairs.
inline std::vector<Cookie> cookies_from_header(const std::string& header) {
  std::vector<Cookie> out;
  std::size_t pos = 0;
  while (pos < header.size()) {
    std::size_t end = header.find(';', pos);
    if (end == std::string::npos) end = header.size();
    std::string piece = header.substr(pos, end - pos);
    std::size_t begin = piece.find_first_not_of(' ');
    if (begin != std::string::npos) {
      piece = piece.substr(begin);
      std::size_t eq = piece.find('=');
      if (eq != std::string::npos && eq > 0)
        out.push_back(Cookie{piece.substr(0, eq), piece.substr(eq + 1), ""});
    }
    pos = end + 1;
  }
  return out;
}

inline std::string serp_response_json(const std::string& query,
                                      const SearchResponse& resp) {
  nlohmann::ordered_json j;
  j["v"] = 1;
  j["query"] = query;
  j["known_query"] = resp.known_query;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const RankedResult& r : resp.results) {
    nlohmann::ordered_json item;
    item["rank"] = r.rank;
    item["url"] = r.url;
    item["domain"] = r.domain;
    item["title"] = r.title;
    item["snippet"] = r.snippet;
    arr.push_back(std::move(item));
  }
  j["results"] = std::move(arr);
  return j.dump();
}

class SimServer {
 public:
  SimServer(const SimEngine& engine, bool allow_truth)
      : engine_(engine), allow_truth_(allow_truth) {
    route();
  }

  ~SimServer() { stop(); }

  // Binds to an OS-assigned port on host and serves from a background
  // thread. Returns the bound port.
  int start(const std::string& host = "127.0.0.1") {
    port_ = server_.bind_to_any_port(host);
    if (port_ < 0) throw Error("simserver: cannot bind " + host);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  // Serves on a fixed port in the calling thread (CLI mode).
  bool listen_blocking(const std::string& host, int port) {
    port_ = port;
    return server_.listen(host, port);
  }

  void stop() {
    if (server_.is_running()) server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }

 private:
  void route() {
    server_.set_post_routing_handler(
        [](const httplib::Request&, httplib::Response& res) {
          res.set_header("x-content-hash",
                         detail::hex16(rng::fnv1a64(res.body)));
        });

    server_.Get("/healthz", [](const httplib::Request&,
                               httplib::Response& res) {
      res.set_content("ok\n", "text/plain");
    });

    server_.Get("/search", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      if (!req.has_param("q")) {
        res.status = 400;
        res.set_content("missing q\n", "text/plain");
        return;
      }
      RequestContext ctx;
      ctx.location = req.get_param_value("loc");
      ctx.language = req.get_param_value("lang");
      ctx.history_topics = SimEngine::history_topics_from_cookies(
          cookies_from_header(req.get_header_value("Cookie")));
      std::string q = req.get_param_value("q");
      SearchResponse resp = engine_.search(q, ctx);
      res.set_content(serp_response_json(q, resp), "application/json");
    });

    server_.Get(R"(/page/([^/]+))", [this](const httplib::Request& req,
                                           httplib::Response& res) {
      const SynthDoc* d = engine_.find_doc(req.matches[1]);
      if (d == nullptr) {
        res.status = 404;
        res.set_content("unknown document\n", "text/plain");
        return;
      }
      res.set_content(d->body, "text/plain");
    });

    server_.Get(R"(/track/(.+))", [this](const httplib::Request& req,
                                         httplib::Response& res) {
      try {
        TrackResponse t = engine_.track(req.matches[1]);
        res.set_header("Set-Cookie",
                       t.cookie_name + "=" + t.cookie_value + "; Path=/");
        res.set_content(t.body, "text/plain");
      } catch (const Error&) {
        res.status = 404;
        res.set_content("unknown topic\n", "text/plain");
      }
    });

    server_.Get(R"(/truth/([^/]+))", [this](const httplib::Request& req,
                                            httplib::Response& res) {
      if (!allow_truth_) {
        res.status = 403;
        res.set_content("truth endpoint disabled\n", "text/plain");
        return;
      }
      auto t = engine_.truth(req.matches[1]);
      if (!t) {
        res.status = 404;
        res.set_content("unknown document\n", "text/plain");
        return;
      }
      nlohmann::ordered_json j;
      j["doc_id"] = t->doc_id;
      j["category"] = t->category;
      j["leaning"] = t->has_leaning ? vocab::to_string(t->leaning) : "none";
      res.set_content(j.dump(), "application/json");
    });
  }

  const SimEngine& engine_;
  bool allow_truth_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace serpaudit::sim

#endif  // SERPAUDIT_SIM_SERVER_HPP
