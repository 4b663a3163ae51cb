// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// End-to-end coverage of the serpaudit binary (spawned as a subprocess;
// SERPAUDIT_CLI_PATH is injected by the build) and of the HTTP facade the
// audit pipeline crawls against.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "serpaudit/analyze.hpp"
#include "serpaudit/crawler.hpp"
#include "serpaudit/errors.hpp"
#include "serpaudit/model.hpp"
#include "serpaudit/query_corpus.hpp"
#include "serpaudit/rng.hpp"
#include "serpaudit/serp_log.hpp"
#include "serpaudit/sim_server.hpp"
#include "serpaudit/simengine.hpp"

#ifndef SERPAUDIT_CLI_PATH
#error "SERPAUDIT_CLI_PATH must point at the serpaudit binary"
#endif

namespace serpaudit {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("serpaudit-cli-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  std::string str() const { return path_.string(); }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const TempDir& tmp, const std::vector<std::string>& args) {
  static int run_counter = 0;
  std::string out_path = (tmp / ("stdout." + std::to_string(run_counter)))
                             .string();
  std::string err_path = (tmp / ("stderr." + std::to_string(run_counter)))
                             .string();
  ++run_counter;
  std::string cmd = SERPAUDIT_CLI_PATH;
  for (const std::string& a : args) cmd += " '" + a + "'";
  cmd += " >'" + out_path + "' 2>'" + err_path + "'";
  int status = std::system(cmd.c_str());
  CliResult r;
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

// serpaudit binary launched as a child process; SIGTERM on teardown.
class ChildProcess {
 public:
  explicit ChildProcess(const std::vector<std::string>& args) {
    pid_ = ::fork();
    if (pid_ == 0) {
      if (::freopen("/dev/null", "w", stdout) == nullptr ||
          ::freopen("/dev/null", "w", stderr) == nullptr)
        ::_exit(126);
      std::vector<std::string> full = {SERPAUDIT_CLI_PATH};
      full.insert(full.end(), args.begin(), args.end());
      std::vector<char*> argv;
      for (std::string& s : full) argv.push_back(s.data());
      argv.push_back(nullptr);
      ::execv(argv[0], argv.data());
      ::_exit(127);
    }
  }
  ~ChildProcess() {
    if (pid_ > 0) {
      ::kill(pid_, SIGTERM);
      ::waitpid(pid_, nullptr, 0);
    }
  }

 private:
  pid_t pid_ = -1;
};

bool wait_for_health(int port) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(0, 200000);
    client.set_read_timeout(1, 0);
    auto res = client.Get("/healthz");
    if (res && res->status == 200) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  return false;
}

std::vector<Query> small_corpus() {
  return {
      make_query("best movies ever", QueryCategory::kGeneral),
      make_query("dinner recipes tonight", QueryCategory::kGeneral),
      make_query("gaza ceasefire negotiations", QueryCategory::kSpecific),
      make_query("west bank settlement expansion", QueryCategory::kSpecific),
  };
}

// ---------------------------------------------------------------------------
// HTTP facade, exercised in-process against a live listener.
// ---------------------------------------------------------------------------

class SimServerHttp : public ::testing::Test {
 protected:
  SimServerHttp()
      : engine_(persona(), small_corpus()), server_(engine_, true) {
    port_ = server_.start();
  }

  static sim::EnginePersona persona() {
    sim::EnginePersona p;
    p.name = "alpha";
    p.seed = 3;
    p.w_hist = 2.0;
    return p;
  }

  httplib::Client client() {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(5, 0);
    return c;
  }

  sim::SimEngine engine_;
  sim::SimServer server_;
  int port_ = -1;
};

TEST_F(SimServerHttp, HealthProbeCarriesAContentHash) {
  auto res = client().Get("/healthz");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, "ok\n");
  EXPECT_EQ(res->get_header_value("x-content-hash"),
            sim::detail::hex16(rng::fnv1a64("ok\n")));
}

TEST_F(SimServerHttp, SearchMirrorsTheInProcessEngine) {
  httplib::Headers cookies = {
      {"Cookie", "topic.conflict.seed-1=abc; unrelated=1"}};
  httplib::Params params = {{"q", "gaza ceasefire negotiations"},
                            {"loc", "IL"},
                            {"lang", "he"}};
  auto res = client().Get("/search", params, cookies);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);

  sim::RequestContext ctx;
  ctx.location = "IL";
  ctx.language = "he";
  ctx.history_topics = sim::SimEngine::history_topics_from_cookies(
      {Cookie{"topic.conflict.seed-1", "abc", ""}, Cookie{"unrelated", "1", ""}});
  EXPECT_EQ(res->body,
            sim::serp_response_json("gaza ceasefire negotiations",
                                    engine_.search("gaza ceasefire "
                                                   "negotiations",
                                                   ctx)));

  auto unknown = client().Get("/search", {{"q", "zzz"}}, httplib::Headers{});
  ASSERT_TRUE(unknown);
  nlohmann::json j = nlohmann::json::parse(unknown->body);
  EXPECT_FALSE(j["known_query"].get<bool>());
  EXPECT_TRUE(j["results"].empty());

  auto missing = client().Get("/search");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 400);
}

TEST_F(SimServerHttp, TrackSetsTheDeterministicTopicCookie) {
  sim::TrackResponse expected = engine_.track("conflict/article-1");
  auto res = client().Get("/track/conflict/article-1");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Set-Cookie"),
            expected.cookie_name + "=" + expected.cookie_value + "; Path=/");
  EXPECT_EQ(res->body, expected.body);

  auto bad = client().Get("/track/stateless/x");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 404);
}

TEST_F(SimServerHttp, PageAndTruthResolveDocumentIds) {
  sim::RequestContext ctx;
  ctx.location = "IL";
  ctx.language = "he";
  sim::SearchResponse serp = engine_.search("best movies ever", ctx);
  ASSERT_FALSE(serp.results.empty());
  const std::string& url = serp.results[0].url;
  std::string doc_id = url.substr(url.rfind('/') + 1);

  auto page = client().Get("/page/" + doc_id);
  ASSERT_TRUE(page);
  EXPECT_EQ(page->status, 200);
  EXPECT_EQ(page->body, engine_.find_doc(doc_id)->body);
  EXPECT_EQ(client().Get("/page/nonexistent")->status, 404);

  auto truth = client().Get("/truth/" + doc_id);
  ASSERT_TRUE(truth);
  EXPECT_EQ(truth->status, 200);
  nlohmann::json j = nlohmann::json::parse(truth->body);
  EXPECT_EQ(j["doc_id"], doc_id);
  EXPECT_TRUE(j.contains("category"));
  EXPECT_TRUE(j.contains("leaning"));
  EXPECT_EQ(client().Get("/truth/nonexistent")->status, 404);
}

TEST(SimServerGate, TruthEndpointIsDisabledByDefault) {
  sim::EnginePersona p;
  p.name = "alpha";
  sim::SimEngine engine(p, small_corpus());
  sim::SimServer server(engine, false);
  int port = server.start();
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/truth/anything");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 403);
}

// ---------------------------------------------------------------------------
// Binary behavior.
// ---------------------------------------------------------------------------

TEST(Cli, ExitCodesSeparateUsageFromDataErrors) {
  TempDir tmp;
  EXPECT_EQ(run_cli(tmp, {"--help"}).code, 0);
  EXPECT_EQ(run_cli(tmp, {}).code, 1);
  EXPECT_EQ(run_cli(tmp, {"frobnicate"}).code, 1);
  CliResult missing = run_cli(
      tmp, {"balance", "--log", (tmp / "absent.ndjson").string(), "--out",
            (tmp / "out.ndjson").string()});
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(missing.err.rfind("error: ", 0), 0u) << missing.err;
}

TEST(Cli, ProfileMakeWritesALoadableRoster) {
  TempDir tmp;
  std::string out = (tmp / "profiles.tsv").string();
  CliResult r = run_cli(tmp, {"profile", "make", "--type", "type2",
                              "--locations", "IL,US-NY", "--per-location", "2",
                              "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("wrote 4 profiles"), std::string::npos);
  std::vector<BotProfile> roster = crawl::load_profiles(out);
  ASSERT_EQ(roster.size(), 4u);
  EXPECT_EQ(roster[0].bot_id, "t2-IL-00");
  EXPECT_EQ(roster[0].language, "he");
  EXPECT_EQ(roster[3].bot_id, "t2-US-NY-01");
  EXPECT_EQ(roster[3].language, "en");
}

TEST(Cli, AuditPipelineRunsEndToEndOverHttp) {
  TempDir tmp;
  std::string corpus_path = (tmp / "queries.tsv").string();
  save_query_corpus(small_corpus(), corpus_path);

  int port = 20000 + static_cast<int>(::getpid() % 10000);
  ChildProcess server({"sim", "serve", "--host", "127.0.0.1", "--port",
                       std::to_string(port), "--seed", "11", "--queries",
                       corpus_path, "--name", "alpha"});
  ASSERT_TRUE(wait_for_health(port)) << "sim server did not come up";

  std::string profiles = (tmp / "profiles.tsv").string();
  ASSERT_EQ(run_cli(tmp, {"profile", "make", "--type", "type2", "--locations",
                          "IL,US-NY", "--per-location", "2", "--out",
                          profiles})
                .code,
            0);

  nlohmann::json plan;
  plan["audit_id"] = "cli-e2e";
  plan["engines"] = nlohmann::json::array(
      {{{"name", "alpha"},
        {"kind", "sim_http"},
        {"base_url", "http://127.0.0.1:" + std::to_string(port)}}});
  plan["queries"] = corpus_path;
  plan["repeat_count"] = 2;
  plan["inter_query_delay_ms"] = {1, 2};
  plan["typing_delay_ms"] = {1, 3};
  std::string plan_path = (tmp / "plan.json").string();
  {
    std::ofstream out(plan_path);
    out << plan.dump(2);
  }

  std::string log = (tmp / "audit.ndjson").string();
  CliResult audit = run_cli(tmp, {"audit", "run", "--config", plan_path,
                                  "--profiles", profiles, "--log", log,
                                  "--seed", "5", "--virtual-clock"});
  ASSERT_EQ(audit.code, 0) << audit.err;
  EXPECT_NE(audit.out.find("wrote 32 records"), std::string::npos)
      << audit.out;
  std::vector<SerpRecord> records = read_serp_log(log);
  ASSERT_EQ(records.size(), 32u);
  for (const SerpRecord& r : records) {
    EXPECT_EQ(r.status, FetchStatus::kOk);
    EXPECT_EQ(r.results.size(), 10u);
    EXPECT_EQ(r.engine, "alpha");
  }

  std::string kept = (tmp / "kept.ndjson").string();
  std::string report = (tmp / "filter-report.tsv").string();
  CliResult filter = run_cli(tmp, {"filter", "success", "--log", log,
                                   "--profiles", profiles, "--out", kept,
                                   "--report", report, "--min-urls", "4",
                                   "--min-ips", "2"});
  ASSERT_EQ(filter.code, 0) << filter.err;
  EXPECT_EQ(read_serp_log(kept).size(), 32u);  // every cell qualifies
  EXPECT_EQ(slurp(report).rfind(
                "location\tengine\tquery_text\tqualifying_ips\treason", 0),
            0u);

  std::string balanced = (tmp / "balanced.ndjson").string();
  ASSERT_EQ(run_cli(tmp, {"balance", "--log", kept, "--out", balanced,
                          "--seed", "3"})
                .code,
            0);
  EXPECT_EQ(read_serp_log(balanced).size(), 32u);  // already balanced

  // Pair metrics are byte deterministic across runs.
  std::string pairs_a = (tmp / "pairs-a.ndjson").string();
  std::string pairs_b = (tmp / "pairs-b.ndjson").string();
  ASSERT_EQ(run_cli(tmp, {"compare", "pairs", "--log", balanced, "--out",
                          pairs_a})
                .code,
            0);
  ASSERT_EQ(run_cli(tmp, {"compare", "pairs", "--log", balanced, "--out",
                          pairs_b})
                .code,
            0);
  std::string pair_bytes = slurp(pairs_a);
  EXPECT_EQ(pair_bytes, slurp(pairs_b));
  std::vector<ComparisonRecord> comparisons =
      analyze::read_comparison_log(pairs_a);
  // 4 queries x 2 repetitions x (2 same + 4 diff) unordered pairs.
  EXPECT_EQ(comparisons.size(), 48u);
  for (const ComparisonRecord& c : comparisons) {
    EXPECT_GE(c.value, 0.0);
    EXPECT_LE(c.value, 1.0);
  }

  std::string fig2 = (tmp / "fig2.ndjson").string();
  CliResult stats = run_cli(tmp, {"stats", "fig2", "--log", pairs_a, "--out",
                                  fig2, "--family-size", "12"});
  ASSERT_EQ(stats.code, 0) << stats.err;
  std::ifstream fig2_in(fig2);
  std::string line;
  int lines = 0;
  while (std::getline(fig2_in, line)) {
    nlohmann::json j = nlohmann::json::parse(line);
    EXPECT_EQ(j["test"], "mann_whitney_u");
    EXPECT_EQ(j["family_size"], 12);
    ++lines;
  }
  EXPECT_EQ(lines, 4);  // one engine, four comparisons

  // Report emission is deterministic through the CLI as well.
  std::string rep_a = (tmp / "rep-a").string();
  std::string rep_b = (tmp / "rep-b").string();
  for (const std::string& dir : {rep_a, rep_b})
    ASSERT_EQ(run_cli(tmp, {"report", "emit", "--figure", "fig2", "--log",
                            pairs_a, "--seed", "9", "--resamples", "200",
                            "--out", dir})
                  .code,
              0);
  for (const char* name : {"fig2.csv", "fig2_tests.csv", "fig2.svg"}) {
    SCOPED_TRACE(name);
    std::string a = slurp(rep_a + "/" + name);
    ASSERT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(rep_b + "/" + name));
  }
}

TEST(Cli, CrossTypeAndAnovaStatsCommands) {
  TempDir tmp;
  Query general = make_query("best movies ever", QueryCategory::kGeneral);
  auto fill = [&](double base) {
    std::vector<ComparisonRecord> records;
    for (bool same : {true, false}) {
      for (int i = 0; i < 2; ++i) {
        ComparisonRecord c;
        c.audit_id = "a1";
        c.engine = "alpha";
        c.query = general;
        c.bot_a = "b1";
        c.bot_b = "b" + std::to_string(i + 2);
        c.same_location = same;
        c.metric = Metric::kDRbo;
        c.value = base + 0.05 * i;
        records.push_back(std::move(c));
      }
    }
    return records;
  };
  std::string t1 = (tmp / "t1.ndjson").string();
  std::string t2 = (tmp / "t2.ndjson").string();
  std::string t3 = (tmp / "t3.ndjson").string();
  analyze::write_comparison_log(fill(0.1), t1);
  analyze::write_comparison_log(fill(0.4), t2);
  analyze::write_comparison_log(fill(0.7), t3);

  std::string cross = (tmp / "cross.ndjson").string();
  CliResult r = run_cli(tmp, {"stats", "crosstype", "--type1", t1, "--type2",
                              t2, "--type3", t3, "--out", cross,
                              "--family-size", "36"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(cross);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    nlohmann::json j = nlohmann::json::parse(line);
    EXPECT_EQ(j["family_size"], 36);
    ++lines;
  }
  EXPECT_EQ(lines, 6);

  // History ANOVA consumes a type-3 roster plus its comparison log.
  crawl::RosterSpec spec;
  spec.bot_type = BotType::kType3;
  spec.locations = {"IL"};
  spec.conflict_bots = 2;
  spec.general_bots = 2;
  spec.stateless_bots = 3;
  std::vector<BotProfile> roster = crawl::make_roster(spec);
  std::string profiles = (tmp / "t3-profiles.tsv").string();
  crawl::save_profiles(roster, profiles);

  auto pair = [&](const char* a, const char* b, double v) {
    ComparisonRecord c;
    c.audit_id = "a1";
    c.engine = "alpha";
    c.query = general;
    c.bot_a = a;
    c.bot_b = b;
    c.same_location = true;
    c.metric = Metric::kDRbo;
    c.value = v;
    return c;
  };
  std::vector<ComparisonRecord> history_pairs = {
      pair("t3-IL-00", "t3-IL-04", 0.9), pair("t3-IL-01", "t3-IL-05", 0.8),
      pair("t3-IL-02", "t3-IL-04", 0.5), pair("t3-IL-03", "t3-IL-06", 0.4),
      pair("t3-IL-04", "t3-IL-05", 0.1), pair("t3-IL-05", "t3-IL-06", 0.2),
  };
  std::string hist_log = (tmp / "hist.ndjson").string();
  analyze::write_comparison_log(history_pairs, hist_log);

  std::string anova = (tmp / "anova.ndjson").string();
  CliResult ar = run_cli(tmp, {"stats", "anova", "--log", hist_log,
                               "--profiles", profiles, "--out", anova});
  ASSERT_EQ(ar.code, 0) << ar.err;
  nlohmann::json aj = nlohmann::json::parse(slurp(anova));
  EXPECT_EQ(aj["test"], "anova_f");
  EXPECT_EQ(aj["group_labels"].size(), 3u);

  // A bot outside the roster is a data error.
  history_pairs.push_back(pair("t3-IL-09", "t3-IL-04", 0.5));
  analyze::write_comparison_log(history_pairs, hist_log);
  EXPECT_EQ(run_cli(tmp, {"stats", "anova", "--log", hist_log, "--profiles",
                          profiles, "--out", anova})
                .code,
            2);
}

TEST(Cli, ValidationSuitePassesEndToEnd) {
  TempDir tmp;
  CliResult r = run_cli(tmp, {"validate", "e2e", "--seed", "7", "--out",
                              (tmp / "scratch").string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
  int passes = 0;
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line))
    if (line.rfind("PASS ", 0) == 0) ++passes;
  EXPECT_GE(passes, 7);
}

}  // namespace
}  // namespace serpaudit
