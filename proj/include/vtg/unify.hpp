#pragma once

// Query unifier: rewrites heterogeneous query styles into one declarative,
// past-tense sentence form. Two backends share the same contract: a
// deterministic rule rewriter and an LLM client with an on-disk cache.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "vtg/canonical_form.hpp"
#include "vtg/error.hpp"
#include "vtg/hash.hpp"
#include "vtg/ingest.hpp"
#include "vtg/lexicon.hpp"
#include "vtg/unifier_prompt.hpp"

namespace vtg {

namespace unify_detail {

inline std::string join(const std::vector<std::string>& tokens, std::size_t from = 0,
                        std::size_t to = std::string::npos) {
  std::string out;
  to = std::min(to, tokens.size());
  for (std::size_t i = from; i < to; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

inline std::vector<std::string> slice(const std::vector<std::string>& v, std::size_t from,
                                      std::size_t to = std::string::npos) {
  to = std::min(to, v.size());
  if (from >= to) return {};
  return {v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to)};
}

inline std::vector<std::string> keys_of(const std::vector<std::string>& tokens) {
  std::vector<std::string> k;
  k.reserve(tokens.size());
  for (const auto& t : tokens) k.push_back(text::key(t));
  return k;
}

// Swaps the word inside a token while keeping surrounding punctuation ("takes," -> "took,").
inline std::string replace_word(const std::string& token, const std::string& word) {
  std::size_t b = 0, e = token.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(token[b])) && token[b] != '\'') ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(token[e - 1]))) --e;
  return token.substr(0, b) + word + token.substr(e);
}

inline std::string lower_token(const std::string& t) {
  if (t == "I" || t.rfind("I'", 0) == 0) return t;
  std::string out = t;
  if (!out.empty()) out[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[0])));
  return out;
}

// Base form of any recognized verb token, or the key itself.
inline std::string verb_base(const std::string& key) {
  if (lexicon::is_base_verb(key)) return key;
  if (auto b = lexicon::base_from_third_person(key); !b.empty()) return b;
  if (words::is_participle(key)) return lexicon::base_from_participle(key);
  return key;
}

inline std::string to_past(const std::string& key) {
  if (lexicon::is_past_form(key) && !lexicon::is_base_verb(key)) return key;
  return lexicon::past_tense(verb_base(key));
}

// End index (exclusive) of a subject phrase starting at i, or i when none.
inline std::size_t subject_end(const std::vector<std::string>& k, std::size_t i) {
  if (i >= k.size()) return i;
  if (words::in(words::pronouns(), k[i])) return i + 1;
  if (words::in(words::determiners(), k[i])) {
    std::size_t j = i + 1;
    while (j < k.size() && j < i + 4 && !words::is_verb_form(k[j])) ++j;
    return std::max(j, std::min(i + 2, k.size()));
  }
  if (words::in(words::bare_agents(), k[i])) return i + 1;
  return i;
}

inline std::vector<std::string> with_article(std::vector<std::string> subj) {
  if (!subj.empty() && words::in(words::bare_agents(), text::key(subj[0]))) {
    subj[0] = lower_token(subj[0]);
    subj.insert(subj.begin(), "a");
  }
  return subj;
}

inline std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Rewrites common question templates into statements. Returns nullopt when none applies.
inline std::optional<std::vector<std::string>> question_to_statement(
    const std::vector<std::string>& t) {
  const auto k = keys_of(t);
  if (k.size() < 2) return std::nullopt;
  static const std::unordered_set<std::string> do_aux{"did", "do", "does"};
  static const std::unordered_set<std::string> be_aux{"is", "are", "was", "were", "am"};
  const std::string& w0 = k[0];

  // SUBJ VERB REST starting at index s, with an optional object inserted after the verb.
  auto clause = [&](std::size_t s, const std::vector<std::string>& object)
      -> std::optional<std::vector<std::string>> {
    const std::size_t se = subject_end(k, s);
    if (se == s || se >= k.size()) return std::nullopt;
    const std::string past = to_past(k[se]);
    return concat({with_article(slice(t, s, se)), {replace_word(t[se], past)}, object,
                   slice(t, se + 1)});
  };

  if ((w0 == "what" || w0 == "which") && do_aux.count(k[1])) {
    return clause(2, {"an", "object"});
  }
  if ((w0 == "what" || w0 == "which") && be_aux.count(k[1])) {
    const std::size_t se = subject_end(k, 2);
    if (se > 2 && se < k.size() && words::is_participle(k[se])) return clause(2, {"an", "object"});
  }
  if (w0 == "what" || w0 == "which" || w0 == "how") {
    for (std::size_t j = 2; j + 1 < k.size(); ++j) {
      if (!do_aux.count(k[j])) continue;
      std::size_t from = 1;
      if (w0 == "how" && (k[1] == "many" || k[1] == "much")) from = 2;
      if (w0 == "how" && from == 1) break;
      std::vector<std::string> object = slice(t, from, j);
      if (w0 != "how") object.insert(object.begin(), "the");
      return clause(j + 1, object);
    }
  }
  if ((w0 == "where" || w0 == "when" || w0 == "how" || w0 == "why") && do_aux.count(k[1])) {
    return clause(2, {});
  }
  if ((w0 == "where" || w0 == "when") && be_aux.count(k[1])) {
    const std::size_t se = subject_end(k, 2);
    if (se > 2 && se < k.size() && words::is_participle(k[se])) return clause(2, {});
  }
  if (do_aux.count(w0) || be_aux.count(w0)) {
    return clause(1, {});
  }
  if (w0 == "who" && words::is_verb_form(k[1]) && !do_aux.count(k[1])) {
    std::size_t v = 1;
    if (be_aux.count(k[1]) && k.size() > 2 && words::is_participle(k[2])) v = 2;
    return concat({{"a", "person", replace_word(t[v], to_past(k[v]))}, slice(t, v + 1)});
  }
  return std::nullopt;
}

// Ensures an explicit subject and converts the main verb to simple past.
inline std::vector<std::string> declarative_past(std::vector<std::string> t) {
  if (t.empty()) return t;
  {
    const SentenceShape s = analyze(join(t));
    if (s.bare_agent) {
      t[0] = lower_token(t[0]);
      t.insert(t.begin(), "a");
    } else if (!s.subject_end) {
      t[0] = lower_token(t[0]);
      t.insert(t.begin(), {"a", "person"});
    }
  }
  const SentenceShape s = analyze(join(t));
  if (!s.main_verb) return t;
  const std::size_t i = *s.main_verb;
  const auto& k = s.keys;
  if (i + 1 < k.size() && words::in(words::present_be(), k[i]) && words::is_participle(k[i + 1])) {
    t[i + 1] = replace_word(t[i + 1], lexicon::past_tense(lexicon::base_from_participle(k[i + 1])));
    t.erase(t.begin() + static_cast<std::ptrdiff_t>(i));
  } else if (k[i] == "is" || k[i] == "am") {
    t[i] = replace_word(t[i], "was");
  } else if (k[i] == "are") {
    t[i] = replace_word(t[i], "were");
  } else if (k[i] == "has") {
    t[i] = replace_word(t[i], "had");
  } else if (k[i] == "does") {
    t[i] = replace_word(t[i], "did");
  } else if (!lexicon::base_from_third_person(k[i]).empty()) {
    t[i] = replace_word(t[i], lexicon::past_tense(lexicon::base_from_third_person(k[i])));
  } else if (words::is_participle(k[i]) && !words::in(words::auxiliaries(), k[i - (i > 0)])) {
    t[i] = replace_word(t[i], lexicon::past_tense(lexicon::base_from_participle(k[i])));
  } else if (s.subject_end && i == *s.subject_end && lexicon::is_base_verb(k[i]) &&
             !lexicon::is_past_form(k[i])) {
    t[i] = replace_word(t[i], lexicon::past_tense(k[i]));
  }
  return t;
}

inline std::vector<std::string> repair_prepositions(std::vector<std::string> t) {
  while (true) {
    const SentenceShape s = analyze(join(t));
    auto at = detail::missing_preposition_at(s);
    if (!at) return t;
    t.insert(t.begin() + static_cast<std::ptrdiff_t>(*at + 1), "of");
  }
}

inline std::vector<std::string> replace_placeholders(const std::vector<std::string>& t) {
  std::vector<std::string> out;
  for (const auto& tok : t) {
    const std::string k = text::key(tok);
    if (k == "something") {
      out.push_back("an");
      out.push_back(replace_word(tok, "object"));
    } else if (k == "somewhere") {
      // Dropped; keep trailing punctuation on the previous token.
      const std::string punct = replace_word(tok, "");
      if (!out.empty()) out.back() += punct;
    } else {
      out.push_back(tok);
    }
  }
  return out;
}

// Surface normalization: single sentence, no question marks, capitalized, period-terminated.
inline std::string finish_sentence(std::string s) {
  s.erase(std::remove(s.begin(), s.end(), '?'), s.end());
  for (char& c : s) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if ((s[i] == '.' || s[i] == '!') && s[i + 1] == ' ') s[i] = ',';
  }
  s = text::trim(s);
  while (!s.empty() && std::string_view(".!,;:").find(s.back()) != std::string_view::npos) {
    s.pop_back();
  }
  s = text::trim(s);
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s + ".";
}

}  // namespace unify_detail

// Deterministic rule rewriter. Pure; output is stable across runs and platforms.
inline std::string unify_rules(std::string_view raw) {
  using namespace unify_detail;
  std::string t = text::trim(raw);
  while (!t.empty() && std::string_view(".?!;:,").find(t.back()) != std::string_view::npos) {
    t.pop_back();
  }
  std::vector<std::string> tokens = text::split_words(t);
  if (tokens.empty()) return finish_sentence("A person was visible");

  if (classify_style(raw) == QueryStyle::Interrogative) {
    if (auto st = question_to_statement(tokens)) {
      tokens = *st;
    } else {
      // Strip question openers and treat the remainder as a statement.
      std::size_t i = 0;
      while (i + 1 < tokens.size() && (words::in(words::question_openers(), text::key(tokens[i])) ||
                                       words::in(words::auxiliaries(), text::key(tokens[i])))) {
        ++i;
      }
      tokens = slice(tokens, i);
    }
  }
  tokens = declarative_past(std::move(tokens));
  tokens = repair_prepositions(std::move(tokens));
  tokens = replace_placeholders(tokens);
  return finish_sentence(join(tokens));
}

struct UnifierBackend {
  enum class Kind { Rules, Llm };
  Kind kind = Kind::Rules;
  std::string endpoint;
  std::string model;
  std::string system_prompt{kUnifierSystemPrompt};
  std::string api_key_env = "VTG_UNIFIER_API_KEY";
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int max_concurrent = 4;
  int retry_base_delay_ms = 500;
  double temperature = 0.0;
  int max_tokens = 64;

  static UnifierBackend rules() { return {}; }
  static UnifierBackend llm(std::string endpoint, std::string model) {
    UnifierBackend b;
    b.kind = Kind::Llm;
    b.endpoint = std::move(endpoint);
    b.model = std::move(model);
    return b;
  }

  std::string prompt_hash() const { return fnv1a_hex(system_prompt); }

  std::string descriptor() const {
    if (kind == Kind::Rules) return "rules";
    return "llm:" + model + "@" + prompt_hash();
  }
};

struct UnifyResult {
  std::string raw;
  std::string unified;
  std::string backend;
  bool valid = false;
  std::vector<std::string> reasons;
  double latency_seconds = 0.0;
  bool cached = false;
};

struct ChatRequest {
  std::string model;
  std::string system;
  std::string user;
  double temperature = 0.0;
  int max_tokens = 64;
  double timeout_seconds = 60.0;
};

// Chat-style completion transport. Implementations throw TransportError on failure.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

// Content-addressed store keyed by (model, prompt hash, raw query). Safe for concurrent
// use; concurrent inserts under one key resolve last-writer-wins.
class UnifyCache {
 public:
  struct Entry {
    std::string unified;
    bool valid = false;
  };

  UnifyCache() = default;
  explicit UnifyCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(*dir_, ec);
    if (ec) throw IoError("cannot create cache directory '" + dir_->string() + "': " + ec.message());
  }

  static std::string key(std::string_view model, std::string_view prompt_hash, std::string_view raw) {
    return Fnv1a64{}.field(model).field(prompt_hash).field(raw).hex();
  }

  std::optional<Entry> get(const std::string& model, const std::string& prompt_hash,
                           const std::string& raw) const {
    const std::string k = key(model, prompt_hash, raw);
    {
      std::shared_lock lock(mu_);
      if (auto it = mem_.find(k); it != mem_.end() && it->second.raw == raw) return it->second.entry;
    }
    if (!dir_) return std::nullopt;
    std::ifstream in(path_for(k));
    if (!in) return std::nullopt;
    std::string unified, meta_line;
    if (!std::getline(in, unified) || !std::getline(in, meta_line)) return std::nullopt;
    try {
      const auto meta = nlohmann::json::parse(meta_line);
      if (meta.at("raw").get<std::string>() != raw || meta.at("model").get<std::string>() != model ||
          meta.at("prompt_hash").get<std::string>() != prompt_hash) {
        return std::nullopt;
      }
      Entry e{unified, meta.at("valid").get<bool>()};
      std::unique_lock lock(mu_);
      mem_[k] = {raw, e};
      return e;
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;
    }
  }

  void put(const std::string& model, const std::string& prompt_hash, const std::string& raw,
           const Entry& e) {
    const std::string k = key(model, prompt_hash, raw);
    {
      std::unique_lock lock(mu_);
      mem_[k] = {raw, e};
    }
    if (!dir_) return;
    nlohmann::ordered_json meta;
    meta["model"] = model;
    meta["prompt_hash"] = prompt_hash;
    meta["raw"] = raw;
    meta["valid"] = e.valid;
    const auto final_path = path_for(k);
    auto tmp = final_path;
    tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << e.unified << '\n' << meta.dump() << '\n';
      if (!out) throw IoError("cannot write cache entry " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, final_path, ec);
    if (ec) throw IoError("cannot commit cache entry " + final_path.string() + ": " + ec.message());
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return mem_.size();
  }

 private:
  struct Slot {
    std::string raw;
    Entry entry;
  };

  std::filesystem::path path_for(const std::string& k) const { return *dir_ / (k + ".entry"); }

  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, Slot> mem_;
};

namespace unify_detail {

struct ParsedResponse {
  std::string sentence;
  std::vector<std::string> problems;
};

inline ParsedResponse parse_response(const std::string& response) {
  ParsedResponse p;
  const std::string body = text::trim(response);
  if (body.empty()) {
    p.problems.emplace_back("empty response");
    return p;
  }
  const auto nl = body.find('\n');
  p.sentence = text::trim(body.substr(0, nl));
  if (nl != std::string::npos) {
    const auto gap = body.find("\n\n");
    if (gap != std::string::npos && !text::trim(body.substr(gap)).empty()) {
      p.problems.emplace_back("multi-paragraph response");
    }
  }
  return p;
}

}  // namespace unify_detail

// One LLM round trip (or cache hit). Retries transport failures with exponential backoff.
inline UnifyResult unify_llm(const std::string& raw, const UnifierBackend& backend,
                             UnifyCache& cache, ChatClient& client) {
  UnifyResult r;
  r.raw = raw;
  r.backend = backend.descriptor();
  const std::string phash = backend.prompt_hash();
  if (auto hit = cache.get(backend.model, phash, raw)) {
    r.unified = hit->unified;
    r.valid = hit->valid && validate_canonical(hit->unified).ok;
    r.cached = true;
    return r;
  }
  const ChatRequest req{backend.model,       backend.system_prompt, raw,
                        backend.temperature, backend.max_tokens,    backend.timeout_seconds};
  const auto t0 = std::chrono::steady_clock::now();
  std::string response;
  for (int attempt = 0;; ++attempt) {
    try {
      response = client.complete(req);
      break;
    } catch (const TransportError&) {
      if (attempt >= backend.max_retries) throw TransportError("unifier unavailable");
      std::this_thread::sleep_for(std::chrono::milliseconds(
          static_cast<long long>(backend.retry_base_delay_ms) << std::min(attempt, 16)));
    }
  }
  r.latency_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto parsed = unify_detail::parse_response(response);
  r.unified = parsed.sentence;
  r.reasons = parsed.problems;
  const auto check = validate_canonical(r.unified);
  for (auto i : check.issues) {
    if (!r.unified.empty()) r.reasons.emplace_back(issue_code(i));
  }
  r.valid = parsed.problems.empty() && check.ok;
  cache.put(backend.model, phash, raw, {r.unified, r.valid});
  return r;
}

struct UnifierCostReport {
  std::string backend;
  std::size_t queries = 0;
  std::size_t distinct_queries = 0;
  std::size_t network_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t llm_valid = 0;
  std::size_t downgrades = 0;  // LLM output replaced by the rule rewrite
  std::size_t failures = 0;    // transport failures after retries
  double total_latency_seconds = 0.0;
  double mean_latency_seconds = 0.0;
  std::optional<double> estimated_tflops;  // new (uncached) calls x per-query cost
};

struct UnifyCorpusOptions {
  double max_failure_fraction = 0.10;
  std::optional<double> tflops_per_query;
};

struct UnifyCorpusResult {
  std::vector<CanonicalRecord> records;
  UnifierCostReport report;
};

// Fills unified_query for every record. The LLM path runs at most
// backend.max_concurrent requests at once; output order matches input order.
inline UnifyCorpusResult unify_corpus(std::vector<CanonicalRecord> records,
                                      const UnifierBackend& backend, UnifyCache* cache = nullptr,
                                      ChatClient* client = nullptr,
                                      const UnifyCorpusOptions& options = {}) {
  UnifyCorpusResult out;
  auto& rep = out.report;
  rep.backend = backend.descriptor();
  rep.queries = records.size();

  std::vector<std::string> distinct;
  std::unordered_map<std::string, std::size_t> slot_of;
  for (const auto& r : records) {
    if (slot_of.emplace(r.raw_query, distinct.size()).second) distinct.push_back(r.raw_query);
  }
  rep.distinct_queries = distinct.size();
  std::vector<std::string> unified(distinct.size());

  if (backend.kind == UnifierBackend::Kind::Rules) {
    for (std::size_t i = 0; i < distinct.size(); ++i) unified[i] = unify_rules(distinct[i]);
    if (options.tflops_per_query) rep.estimated_tflops = 0.0;
  } else {
    if (cache == nullptr || client == nullptr) {
      throw ValidationError("LLM unifier requires a cache and a client");
    }
    std::vector<UnifyResult> results(distinct.size());
    std::vector<char> failed(distinct.size(), 0);
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::optional<std::string> fatal;
    auto worker = [&] {
      for (std::size_t i = next++; i < distinct.size(); i = next++) {
        try {
          results[i] = unify_llm(distinct[i], backend, *cache, *client);
        } catch (const TransportError&) {
          failed[i] = 1;
        } catch (const std::exception& e) {
          std::lock_guard lock(err_mu);
          if (!fatal) fatal = e.what();
          failed[i] = 1;
        }
      }
    };
    const int workers = std::max(1, std::min<int>(backend.max_concurrent,
                                                  static_cast<int>(distinct.size())));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (fatal) throw IoError("unifier aborted: " + *fatal);

    std::size_t new_calls = 0;
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      if (failed[i]) {
        ++rep.failures;
        ++rep.network_calls;
        ++rep.downgrades;
        unified[i] = unify_rules(distinct[i]);
        continue;
      }
      const auto& r = results[i];
      if (r.cached) {
        ++rep.cache_hits;
      } else {
        ++rep.network_calls;
        ++new_calls;
      }
      rep.total_latency_seconds += r.latency_seconds;
      if (r.valid) {
        ++rep.llm_valid;
        unified[i] = r.unified;
      } else {
        ++rep.downgrades;
        unified[i] = unify_rules(distinct[i]);
      }
    }
    if (rep.network_calls > 0 &&
        static_cast<double>(rep.failures) >
            options.max_failure_fraction * static_cast<double>(rep.network_calls)) {
      throw TransportError("unifier unavailable: " + std::to_string(rep.failures) + " of " +
                           std::to_string(rep.network_calls) + " calls failed");
    }
    if (!distinct.empty()) {
      rep.mean_latency_seconds = rep.total_latency_seconds / static_cast<double>(distinct.size());
    }
    if (options.tflops_per_query) {
      rep.estimated_tflops = static_cast<double>(new_calls) * *options.tflops_per_query;
    }
  }
  for (auto& r : records) r.unified_query = unified[slot_of.at(r.raw_query)];
  out.records = std::move(records);
  return out;
}

inline nlohmann::ordered_json to_json(const UnifierCostReport& r) {
  nlohmann::ordered_json j;
  j["backend"] = r.backend;
  j["queries"] = r.queries;
  j["distinct_queries"] = r.distinct_queries;
  j["network_calls"] = r.network_calls;
  j["cache_hits"] = r.cache_hits;
  j["llm_valid"] = r.llm_valid;
  j["downgrades"] = r.downgrades;
  j["failures"] = r.failures;
  j["total_latency_seconds"] = r.total_latency_seconds;
  j["mean_latency_seconds"] = r.mean_latency_seconds;
  j["estimated_tflops"] =
      r.estimated_tflops ? nlohmann::ordered_json(*r.estimated_tflops) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace vtg
