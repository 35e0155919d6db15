#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "vtg/canonical_form.hpp"
#include "vtg/unify.hpp"
#include "vtg/unify_http.hpp"

using namespace vtg;

namespace {

std::set<std::string> reason_codes(std::string_view s) {
  std::set<std::string> out;
  for (auto i : validate_canonical(s).issues) out.insert(issue_code(i));
  return out;
}

struct Fixture {
  const char* raw;
  const char* rules;
  const char* reference;  // reference rewrite for the five benchmark styles
  std::set<std::string> reasons;
};

const std::vector<Fixture>& fixtures() {
  static const std::vector<Fixture> f{
      {"Add onion to the pan", "A person added onion to the pan.", "A person added onion to the pan.",
       {"no_terminal_period", "no_subject"}},
      {"What did I put in the bucket?", "I put an object in the bucket.",
       "I placed an object into the bucket.", {"no_terminal_period", "interrogative"}},
      {"Takes a cup out of the cabinet.", "A person took a cup out of the cabinet.",
       "A person took a cup out of the cabinet.", {"no_subject", "present_tense"}},
      {"person takes a cup out the fridge.", "A person took a cup out of the fridge.",
       "A person took a cup out of the fridge.",
       {"not_capitalized", "no_subject", "present_tense", "missing_preposition"}},
      {"A woman is walking along a track.", "A woman walked along a track.", "A woman walked along a track.",
       {"present_progressive"}},
  };
  return f;
}

// Scripted client: pops responses in order; "!" entries throw a transport failure.
class ScriptedClient : public ChatClient {
 public:
  explicit ScriptedClient(std::vector<std::string> script) : script_(std::move(script)) {}
  std::string complete(const ChatRequest& req) override {
    std::lock_guard lock(mu_);
    ++calls;
    last = req;
    if (script_.empty()) throw TransportError("script exhausted");
    std::string r = script_.front();
    script_.erase(script_.begin());
    if (r == "!") throw TransportError("connection refused");
    return r;
  }
  int calls = 0;
  ChatRequest last;

 private:
  std::mutex mu_;
  std::vector<std::string> script_;
};

// Echoes a rule rewrite of the user message; counts calls.
class RuleEchoClient : public ChatClient {
 public:
  std::string complete(const ChatRequest& req) override {
    ++calls;
    return unify_rules(req.user);
  }
  std::atomic<int> calls{0};
};

class AlwaysDown : public ChatClient {
 public:
  std::string complete(const ChatRequest&) override { throw TransportError("down"); }
};

UnifierBackend fast_llm() {
  auto b = UnifierBackend::llm("http://127.0.0.1:1", "test-model");
  b.retry_base_delay_ms = 1;
  return b;
}

std::filesystem::path temp_dir(const std::string& tag) {
  auto d = std::filesystem::temp_directory_path() /
           ("vtg-unify-" + tag + "-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

// ---- validator -------------------------------------------------------------

TEST(Validator, ReferenceRewritesAreCanonical) {
  for (const auto& f : fixtures()) {
    EXPECT_TRUE(validate_canonical(f.reference).ok) << f.reference;
  }
}

TEST(Validator, OriginalsFailWithExpectedReasons) {
  for (const auto& f : fixtures()) {
    EXPECT_FALSE(validate_canonical(f.raw).ok) << f.raw;
    EXPECT_EQ(reason_codes(f.raw), f.reasons) << f.raw;
  }
}

TEST(Validator, EdgeCases) {
  EXPECT_EQ(reason_codes(""), (std::set<std::string>{"empty"}));
  EXPECT_TRUE(reason_codes("A person opened the door. A person left.").count("multiple_sentences"));
  EXPECT_TRUE(reason_codes("A person picked up something.").count("vague_placeholder"));
  EXPECT_TRUE(validate_canonical("I opened the fridge.").ok);
  EXPECT_TRUE(validate_canonical("The man poured water into a glass.").ok);
}

TEST(Style, ClassifiesBenchmarkStyles) {
  EXPECT_EQ(classify_style("Add onion to the pan"), QueryStyle::Imperative);
  EXPECT_EQ(classify_style("What did I put in the bucket?"), QueryStyle::Interrogative);
  EXPECT_EQ(classify_style("A woman is walking along a track."), QueryStyle::DeclarativePresent);
  EXPECT_EQ(classify_style("A person added onion to the pan."), QueryStyle::DeclarativePast);
}

// ---- rule backend ----------------------------------------------------------

TEST(UnifyRules, RewritesBenchmarkStyles) {
  for (const auto& f : fixtures()) EXPECT_EQ(unify_rules(f.raw), f.rules);
}

TEST(UnifyRules, OutputIsValidAndIdempotent) {
  const std::vector<std::string> extra{
      "Where did I put the scissors?", "Is the man holding a knife?", "who opens the door",
      "how many apples did I cut?", "the person is sitting on a chair", "cut the tomato",
      "He cuts a cucumber.", "Stir the soup. Add salt.", "someone picks something up",
      "A person puts the box somewhere", "", "   ??? ",
  };
  std::vector<std::string> inputs = extra;
  for (const auto& f : fixtures()) inputs.emplace_back(f.raw);
  for (const auto& raw : inputs) {
    const std::string once = unify_rules(raw);
    EXPECT_TRUE(validate_canonical(once).ok) << "'" << raw << "' -> '" << once << "'";
    EXPECT_EQ(unify_rules(once), once) << raw;
  }
}

TEST(UnifyRules, CanonicalInputIsAFixedPoint) {
  for (const auto& f : fixtures()) EXPECT_EQ(unify_rules(f.reference), f.reference);
}

// ---- backend / prompt ------------------------------------------------------

TEST(Backend, DescriptorAndPromptHash) {
  EXPECT_EQ(UnifierBackend::rules().descriptor(), "rules");
  auto b = UnifierBackend::llm("http://x", "qwen3-4b");
  EXPECT_EQ(b.descriptor(), "llm:qwen3-4b@" + b.prompt_hash());
  auto b2 = b;
  b2.system_prompt += " ";
  EXPECT_NE(b.prompt_hash(), b2.prompt_hash());
}

TEST(Backend, BundledPromptMatchesDataFile) {
  std::ifstream in(std::filesystem::path(VTG_DATA_DIR) / "unifier_prompt.txt", std::ios::binary);
  ASSERT_TRUE(in);
  std::string file((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(file, std::string(kUnifierSystemPrompt));
}

// ---- LLM path with a scripted client ---------------------------------------

TEST(UnifyLlm, ValidResponseIsAcceptedAndCached) {
  UnifyCache cache;
  ScriptedClient client({"A person added onion to the pan.\n"});
  const auto b = fast_llm();
  const auto r = unify_llm("Add onion to the pan", b, cache, client);
  EXPECT_TRUE(r.valid);
  EXPECT_FALSE(r.cached);
  EXPECT_EQ(r.unified, "A person added onion to the pan.");
  EXPECT_EQ(client.last.system, std::string(kUnifierSystemPrompt));
  EXPECT_EQ(client.last.user, "Add onion to the pan");
  EXPECT_EQ(client.last.temperature, 0.0);

  const auto again = unify_llm("Add onion to the pan", b, cache, client);
  EXPECT_TRUE(again.cached);
  EXPECT_EQ(again.unified, r.unified);
  EXPECT_EQ(client.calls, 1);
}

TEST(UnifyLlm, InvalidResponsesCarryReasons) {
  UnifyCache cache;
  ScriptedClient client({"", "A person sat.\n\nExplanation: tense fixed.", "a person is sitting"});
  const auto b = fast_llm();
  auto r1 = unify_llm("q1", b, cache, client);
  EXPECT_FALSE(r1.valid);
  EXPECT_EQ(r1.reasons, std::vector<std::string>{"empty response"});
  auto r2 = unify_llm("q2", b, cache, client);
  EXPECT_FALSE(r2.valid);
  EXPECT_EQ(r2.unified, "A person sat.");
  EXPECT_EQ(r2.reasons, std::vector<std::string>{"multi-paragraph response"});
  auto r3 = unify_llm("q3", b, cache, client);
  EXPECT_FALSE(r3.valid);
  EXPECT_NE(std::find(r3.reasons.begin(), r3.reasons.end(), "present_progressive"), r3.reasons.end());
}

TEST(UnifyLlm, RetriesThenSucceeds) {
  UnifyCache cache;
  ScriptedClient client({"!", "!", "A woman walked along a track."});
  const auto r = unify_llm("A woman is walking along a track.", fast_llm(), cache, client);
  EXPECT_TRUE(r.valid);
  EXPECT_EQ(client.calls, 3);
}

TEST(UnifyLlm, GivesUpAfterMaxRetries) {
  UnifyCache cache;
  ScriptedClient client({"!", "!", "!", "!", "never reached."});
  try {
    unify_llm("x", fast_llm(), cache, client);
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_EQ(std::string(e.what()), "unifier unavailable");
  }
  EXPECT_EQ(client.calls, 4);
  EXPECT_EQ(cache.size(), 0u);
}

TEST(UnifyCacheTest, KeyedByModelPromptAndRaw) {
  UnifyCache cache;
  cache.put("m", "h", "raw", {"A person sat.", true});
  EXPECT_TRUE(cache.get("m", "h", "raw"));
  EXPECT_FALSE(cache.get("m2", "h", "raw"));
  EXPECT_FALSE(cache.get("m", "h2", "raw"));
  EXPECT_FALSE(cache.get("m", "h", "raw2"));
  EXPECT_NE(UnifyCache::key("ab", "c", "d"), UnifyCache::key("a", "bc", "d"));
}

TEST(UnifyCacheTest, PersistsAcrossInstances) {
  const auto dir = temp_dir("disk");
  {
    UnifyCache cache(dir);
    cache.put("m", "h", "What did I put in the bucket?", {"I put an object in the bucket.", true});
  }
  UnifyCache reopened(dir);
  const auto e = reopened.get("m", "h", "What did I put in the bucket?");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->unified, "I put an object in the bucket.");
  EXPECT_TRUE(e->valid);
  std::filesystem::remove_all(dir);
}

// ---- corpus level ----------------------------------------------------------

namespace {
std::vector<CanonicalRecord> corpus_of(std::size_t n, std::size_t distinct) {
  std::vector<CanonicalRecord> recs;
  for (std::size_t i = 0; i < n; ++i) {
    recs.push_back(make_record(DatasetId::Kind::CharadesSta, "v" + std::to_string(i), 30, {1, 2},
                               "a person opens door " + std::to_string(i % distinct)));
  }
  return recs;
}
}  // namespace

TEST(UnifyCorpus, RulesBackendFillsEveryRecord) {
  const auto res = unify_corpus(corpus_of(10, 10), UnifierBackend::rules());
  for (const auto& r : res.records) {
    ASSERT_TRUE(r.unified_query);
    EXPECT_TRUE(validate_canonical(*r.unified_query).ok) << *r.unified_query;
  }
  EXPECT_EQ(res.report.network_calls, 0u);
}

TEST(UnifyCorpus, CostScalesWithNewCalls) {
  UnifyCache cache;
  RuleEchoClient client;
  UnifyCorpusOptions opt;
  opt.tflops_per_query = 0.136;
  const auto first = unify_corpus(corpus_of(1000, 1000), fast_llm(), &cache, &client, opt);
  EXPECT_EQ(first.report.network_calls, 1000u);
  EXPECT_NEAR(*first.report.estimated_tflops, 136.0, 1e-9);
  EXPECT_EQ(first.report.llm_valid, 1000u);

  const auto second = unify_corpus(corpus_of(1000, 1000), fast_llm(), &cache, &client, opt);
  EXPECT_EQ(second.report.cache_hits, 1000u);
  EXPECT_EQ(second.report.network_calls, 0u);
  EXPECT_DOUBLE_EQ(*second.report.estimated_tflops, 0.0);
  EXPECT_EQ(client.calls.load(), 1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    EXPECT_EQ(first.records[i].unified_query, second.records[i].unified_query);
  }
}

TEST(UnifyCorpus, DuplicateRawQueriesShareOneCall) {
  UnifyCache cache;
  RuleEchoClient client;
  const auto res = unify_corpus(corpus_of(50, 5), fast_llm(), &cache, &client);
  EXPECT_EQ(res.report.distinct_queries, 5u);
  EXPECT_EQ(client.calls.load(), 5);
}

TEST(UnifyCorpus, InvalidOutputDowngradesToRules) {
  UnifyCache cache;
  ScriptedClient client({"a person is opening the door"});
  auto b = fast_llm();
  b.max_concurrent = 1;
  const auto res = unify_corpus(corpus_of(1, 1), b, &cache, &client);
  EXPECT_EQ(res.report.downgrades, 1u);
  EXPECT_EQ(*res.records[0].unified_query, unify_rules("a person opens door 0"));
}

TEST(UnifyCorpus, AbortsWhenEndpointIsDown) {
  UnifyCache cache;
  AlwaysDown client;
  auto b = fast_llm();
  b.max_retries = 0;
  EXPECT_THROW(unify_corpus(corpus_of(4, 4), b, &cache, &client), TransportError);
}

TEST(UnifyCorpus, LlmBackendNeedsCacheAndClient) {
  EXPECT_THROW(unify_corpus(corpus_of(1, 1), fast_llm()), ValidationError);
}

// ---- HTTP client against a local server ------------------------------------

TEST(HttpClient, EndpointSplitting) {
  EXPECT_EQ(split_endpoint("http://localhost:8080").path, "/v1/chat/completions");
  EXPECT_EQ(split_endpoint("http://localhost:8080/").origin, "http://localhost:8080");
  EXPECT_EQ(split_endpoint("http://h/api/chat").path, "/api/chat");
  EXPECT_THROW(split_endpoint("localhost:8080"), ValidationError);
  EXPECT_THROW(split_endpoint("ftp://h"), ValidationError);
}

TEST(HttpClient, RoundTripThroughMockServer) {
  httplib::Server server;
  std::string seen_auth;
  nlohmann::json seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = nlohmann::json::parse(req.body);
    const std::string user = seen_body["messages"][1]["content"];
    nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", unify_rules(user)}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  HttpChatClient client(base, "secret");
  UnifyCache cache;
  auto b = UnifierBackend::llm(base, "mock");
  b.timeout_seconds = 5;
  const auto r = unify_llm("Add onion to the pan", b, cache, client);
  EXPECT_TRUE(r.valid);
  EXPECT_EQ(r.unified, "A person added onion to the pan.");
  EXPECT_EQ(seen_auth, "Bearer secret");
  EXPECT_EQ(seen_body["model"], "mock");
  EXPECT_EQ(seen_body["messages"][0]["role"], "system");
  EXPECT_EQ(seen_body["temperature"], 0.0);

  HttpChatClient broken(base + "/broken");
  EXPECT_THROW(broken.complete({"m", "s", "u", 0.0, 8, 5.0}), TransportError);

  server.stop();
  th.join();
}
