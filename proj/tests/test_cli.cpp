#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "support.hpp"
#include "vtg/cli.hpp"
#include "vtg/unify_http.hpp"

namespace fs = std::filesystem;
using namespace vtg;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "vtgkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("vtg-cli-") + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& content = {}) const {
    const auto p = path_ / name;
    if (!content.empty()) std::ofstream(p) << content;
    return p.string();
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

// ---- dispatch and exit codes -------------------------------------------------

TEST(Cli, UnknownSubcommandPrintsUsage) {
  const auto r = run_cli({"frobnicate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown subcommand 'frobnicate'"), std::string::npos);
  EXPECT_NE(r.err.find("ingest"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, MissingSubcommandAndBadFlags) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"cost"}).code, 1);  // --seconds required
  EXPECT_EQ(run_cli({"cost", "--seconds", "abc"}).code, 1);
  EXPECT_EQ(run_cli({"sample", "--corpus", "x.jsonl"}).code, 1);  // --seed required
}

TEST(Cli, ExitCodeClasses) {
  TempDir t;
  // Missing input file: I/O class.
  EXPECT_EQ(run_cli({"stats", "--corpus", t.file("absent.jsonl")}).code, 2);
  // Validation failure: unknown dataset.
  EXPECT_EQ(run_cli({"ingest", "--dataset", "imagenet", "--annotations", t.file("a.txt", "x"), "--out", "-"}).code, 1);
  // Transport failure: nothing listens on the endpoint.
  const auto corpus = t.file("c.jsonl",
                             R"({"dataset": "tacos", "video_id": "v", "duration": 10, "start": 1, "end": 2, "query": "He cuts a cucumber.", "split": "train"})"
                             "\n");
  const auto r = run_cli({"unify", "--in", corpus, "--out", t.file("u.jsonl"), "--backend", "llm", "--endpoint",
                          "http://127.0.0.1:9", "--model", "m", "--cache-dir", t.file("cache"), "--max-retries", "0",
                          "--timeout", "1"});
  EXPECT_EQ(r.code, 2) << r.err;
}

TEST(Cli, CostTable) {
  const auto r = run_cli({"cost", "--method", "universalvtg", "--seconds", "500"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("175"), std::string::npos);
  EXPECT_NE(r.out.find("0.0865"), std::string::npos);
  const auto bad = run_cli({"cost", "--method", "unitime", "--seconds", "600"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("registered points only"), std::string::npos);
}

TEST(Cli, MatrixFromCsv) {
  TempDir t;
  std::string csv;
  for (const auto& [k, v] : fixtures::cross_dataset_fixture()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    csv += k.first.slug() + "," + k.second.slug() + "," + buf + "\n";
  }
  const auto r = run_cli({"matrix", "--cells", t.file("cells.csv", csv), "--format", "markdown-table"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("**19.55**"), std::string::npos);
  EXPECT_NE(r.out.find("**39.52**"), std::string::npos);
}

// ---- help snapshots ----------------------------------------------------------

// Set VTG_UPDATE_SNAPSHOTS=1 to rewrite the stored help texts.
TEST(Cli, HelpSnapshots) {
  const bool update = std::getenv("VTG_UPDATE_SNAPSHOTS") != nullptr;
  for (const std::string sub : {"", "ingest", "unify", "sample", "ground", "eval", "matrix", "cost", "stats"}) {
    std::vector<std::string> args;
    if (!sub.empty()) args.push_back(sub);
    args.push_back("--help");
    const auto r = run_cli(args);
    ASSERT_EQ(r.code, 0) << sub;
    const fs::path snap = fs::path(VTG_SNAPSHOT_DIR) / ((sub.empty() ? std::string("main") : sub) + ".txt");
    if (update) {
      std::ofstream(snap, std::ios::binary) << r.out;
      continue;
    }
    ASSERT_TRUE(fs::exists(snap)) << snap << " missing; run with VTG_UPDATE_SNAPSHOTS=1";
    EXPECT_EQ(r.out, slurp(snap.string())) << "help for '" << sub << "' changed";
  }
}

TEST(Cli, HelpListsDefaults) {
  const auto r = run_cli({"ground", "--help"});
  EXPECT_NE(r.out.find("--stride"), std::string::npos);
  EXPECT_NE(r.out.find("2.5"), std::string::npos);
  EXPECT_NE(r.out.find("[5,10,20,40]"), std::string::npos);
}

// ---- end-to-end pipeline -----------------------------------------------------

TEST(Cli, PipelineIngestUnifySampleGroundEval) {
  TempDir t;
  // Four videos, two queries each; the planted generator supplies features.
  std::mt19937_64 gen(5);
  std::string annotations, durations;
  std::vector<QueryEmbedding> queries;
  std::vector<fixtures::PlantedTrial> trials;
  for (int v = 0; v < 4; ++v) {
    const std::string vid = "VID" + std::to_string(v);
    auto trial = fixtures::planted_trial(gen, 0.05);
    trial.features.video_id = vid;
    write_features(trial.features, t.path() / (vid + ".vtgf"));
    char line[128];
    std::snprintf(line, sizeof line, "%s %.1f %.1f##a person is opening a door.\n", vid.c_str(), trial.truth.start,
                  trial.truth.end);
    annotations += line;
    std::snprintf(line, sizeof line, "%s 0.0 3.0##person takes a cup out the fridge.\n", vid.c_str());
    annotations += line;
    durations += "{\"video_id\": \"" + vid + "\", \"duration\": 100}\n";
    trials.push_back(std::move(trial));
  }
  const auto canon = t.file("canon.jsonl");
  auto r = run_cli({"ingest", "--dataset", "charades-sta", "--annotations", t.file("a.txt", annotations),
                    "--duration-index", t.file("d.jsonl", durations), "--out", canon, "--report",
                    t.file("ingest_report.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream cin_(canon);
  const auto records = parse_generic_jsonl(cin_).records;
  ASSERT_EQ(records.size(), 8u);

  const auto unified = t.file("unified.jsonl");
  r = run_cli({"unify", "--in", canon, "--out", unified, "--report", t.file("unify_report.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream uin(unified);
  for (const auto& rec : parse_generic_jsonl(uin).records) {
    ASSERT_TRUE(rec.unified_query);
    EXPECT_TRUE(validate_canonical(*rec.unified_query).ok);
  }

  const auto plan = t.file("plan.json", R"({"stage": "II", "datasets": ["charades-sta"], "videos_per_dataset": 2})");
  const auto m1 = t.file("m1.jsonl"), m2 = t.file("m2.jsonl");
  ASSERT_EQ(run_cli({"sample", "--corpus", unified, "--plan", plan, "--seed", "7", "--iterations", "3", "--out", m1}).code, 0);
  ASSERT_EQ(run_cli({"sample", "--corpus", unified, "--plan", plan, "--seed", "7", "--iterations", "3", "--out", m2}).code, 0);
  EXPECT_EQ(slurp(m1), slurp(m2));
  std::ifstream min_(m1);
  const auto batches = read_batches(min_);
  ASSERT_EQ(batches.size(), 3u);
  EXPECT_EQ(batches[0].uids.size(), 4u);

  // Query embeddings: the planted vector for the door query, a random one otherwise.
  std::vector<QueryEmbedding> qs;
  std::string index;
  for (const auto& rec : records) {
    const int v = rec.video.video_id.back() - '0';
    const bool planted = rec.raw_query.find("door") != std::string::npos;
    qs.push_back({rec.uid, planted ? trials[static_cast<std::size_t>(v)].query.vector : fixtures::unit_vector(gen, 64)});
  }
  {
    std::ofstream qm(t.path() / "q.vtgf", std::ios::binary), qi(t.path() / "q.index.jsonl");
    write_queries(qs, qm, qi);
  }
  const auto preds = t.file("preds.jsonl");
  r = run_cli({"ground", "--features", t.path().string(), "--queries", t.file("q.vtgf"), "--index",
               t.file("q.index.jsonl"), "--corpus", canon, "--out", preds});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream pin(preds);
  EXPECT_EQ(read_predictions(pin).size(), 8u);

  r = run_cli({"eval", "--preds", preds, "--gt", canon, "--convention", "long", "--format", "markdown-table"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("| Charades-STA |"), std::string::npos);
  EXPECT_NE(r.out.find("R@1@0.5"), std::string::npos);
  // The four planted queries are found; the four random ones mostly are not.
  std::ifstream pin2(preds);
  const auto p = read_predictions(pin2);
  int planted_hits = 0;
  for (const auto& ps : p) {
    for (const auto& rec : records) {
      if (rec.uid == ps.uid && rec.raw_query.find("door") != std::string::npos &&
          temporal_iou(ps.candidates.front().span, rec.span) >= 0.5) {
        ++planted_hits;
      }
    }
  }
  EXPECT_EQ(planted_hits, 4);

  r = run_cli({"stats", "--corpus", canon, "--format", "comma-separated"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Charades-STA,8,4,100.00,6.50"), std::string::npos) << r.out;
}

TEST(Cli, UnifyThroughMockEndpointUsesCache) {
  httplib::Server server;
  std::atomic<int> calls{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    const auto body = nlohmann::json::parse(req.body);
    const std::string user = body["messages"][1]["content"];
    res.set_content(nlohmann::json{{"choices", {{{"message", {{"content", unify_rules(user)}}}}}}}.dump(),
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  TempDir t;
  std::string lines;
  for (int i = 0; i < 5; ++i) {
    lines += R"({"dataset": "tacos", "video_id": "v", "duration": 100, "start": )" + std::to_string(i) +
             R"(, "end": 50, "query": "He cuts cucumber )" + std::to_string(i) + R"(.", "split": "train"})" + "\n";
  }
  const auto in = t.file("c.jsonl", lines);
  const std::string endpoint = "http://127.0.0.1:" + std::to_string(port);
  const std::vector<std::string> args{"unify", "--in", in, "--out", t.file("u.jsonl"), "--backend", "llm",
                                      "--endpoint", endpoint, "--model", "mock", "--cache-dir", t.file("cache"),
                                      "--report", t.file("rep.json")};
  ASSERT_EQ(run_cli(args).code, 0);
  EXPECT_EQ(calls.load(), 5);
  const auto first = slurp(t.file("u.jsonl"));
  ASSERT_EQ(run_cli(args).code, 0);
  EXPECT_EQ(calls.load(), 5);
  EXPECT_EQ(slurp(t.file("u.jsonl")), first);
  const auto report = nlohmann::json::parse(slurp(t.file("rep.json")));
  EXPECT_EQ(report["cache_hits"], 5);
  EXPECT_EQ(report["network_calls"], 0);
  server.stop();
  th.join();
}
