#pragma once

// Surface analysis of query strings: style classification and the validator for
// the canonical declarative form (explicit subject, past tense, one sentence,
// capitalized, terminal period).

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "vtg/lexicon.hpp"

namespace vtg {

enum class QueryStyle { Interrogative, Imperative, DeclarativePresent, DeclarativePast, Fragment };

inline const char* style_name(QueryStyle s) {
  switch (s) {
    case QueryStyle::Interrogative: return "interrogative";
    case QueryStyle::Imperative: return "imperative";
    case QueryStyle::DeclarativePresent: return "declarative_present";
    case QueryStyle::DeclarativePast: return "declarative_past";
    case QueryStyle::Fragment: return "fragment";
  }
  return "fragment";
}

enum class CanonicalIssue {
  Empty,
  MultipleSentences,
  NoTerminalPeriod,
  Interrogative,
  NotCapitalized,
  NoSubject,
  PresentProgressive,
  PresentTense,
  VaguePlaceholder,
  MissingPreposition,
};

inline const char* issue_code(CanonicalIssue i) {
  switch (i) {
    case CanonicalIssue::Empty: return "empty";
    case CanonicalIssue::MultipleSentences: return "multiple_sentences";
    case CanonicalIssue::NoTerminalPeriod: return "no_terminal_period";
    case CanonicalIssue::Interrogative: return "interrogative";
    case CanonicalIssue::NotCapitalized: return "not_capitalized";
    case CanonicalIssue::NoSubject: return "no_subject";
    case CanonicalIssue::PresentProgressive: return "present_progressive";
    case CanonicalIssue::PresentTense: return "present_tense";
    case CanonicalIssue::VaguePlaceholder: return "vague_placeholder";
    case CanonicalIssue::MissingPreposition: return "missing_preposition";
  }
  return "unknown";
}

struct CanonicalCheck {
  bool ok = false;
  std::vector<CanonicalIssue> issues;

  bool has(CanonicalIssue i) const {
    return std::find(issues.begin(), issues.end(), i) != issues.end();
  }
};

namespace text {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Lowercased word with surrounding punctuation removed ("Bucket?" -> "bucket").
inline std::string key(std::string_view token) {
  std::size_t b = 0, e = token.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(token[b])) && token[b] != '\'') ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(token[e - 1]))) --e;
  std::string out(token.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace text

namespace words {

inline bool in(const std::unordered_set<std::string>& set, const std::string& w) {
  return set.count(w) > 0;
}

inline const std::unordered_set<std::string>& pronouns() {
  static const std::unordered_set<std::string> s{
      "i",        "he",       "she",       "they",     "we",     "you",      "it",
      "someone",  "somebody", "everyone",  "everybody", "nobody", "people",  "anyone"};
  return s;
}

inline const std::unordered_set<std::string>& determiners() {
  static const std::unordered_set<std::string> s{
      "a",     "an",    "the",   "this",  "that",  "these",   "those",   "my",
      "his",   "her",   "their", "our",   "your",  "its",     "one",     "two",
      "three", "four",  "five",  "some",  "several", "many",  "both",    "each",
      "every", "another"};
  return s;
}

// Agent nouns that often open captions without an article ("person takes ...").
inline const std::unordered_set<std::string>& bare_agents() {
  static const std::unordered_set<std::string> s{
      "person", "man", "woman", "boy", "girl", "child", "kid", "lady", "guy", "player",
      "chef",   "cook", "worker", "athlete"};
  return s;
}

inline const std::unordered_set<std::string>& question_openers() {
  static const std::unordered_set<std::string> s{
      "what", "where", "when", "who", "whom", "whose", "which", "why", "how",
      "did",  "do",    "does", "can", "could", "would", "should", "will"};
  return s;
}

inline const std::unordered_set<std::string>& present_be() {
  static const std::unordered_set<std::string> s{"is", "are", "am"};
  return s;
}

inline const std::unordered_set<std::string>& auxiliaries() {
  static const std::unordered_set<std::string> s{"is",  "are", "am",  "was", "were",
                                                  "has", "have", "had", "did", "does", "do"};
  return s;
}

inline const std::unordered_set<std::string>& vague_placeholders() {
  static const std::unordered_set<std::string> s{"somewhere", "something"};
  return s;
}

inline const std::unordered_set<std::string>& plural_subject_pronouns() {
  static const std::unordered_set<std::string> s{"i", "you", "we", "they", "people"};
  return s;
}

inline bool is_participle(const std::string& w) {
  return w.size() >= 5 && w.compare(w.size() - 3, 3, "ing") == 0;
}

inline bool is_verb_form(const std::string& w) {
  if (w.empty()) return false;
  if (in(auxiliaries(), w)) return true;
  if (lexicon::is_base_verb(w)) return true;
  if (!lexicon::base_from_third_person(w).empty()) return true;
  if (lexicon::is_past_form(w)) return true;
  if (is_participle(w) && lexicon::is_base_verb(lexicon::base_from_participle(w))) return true;
  return false;
}

}  // namespace words

// Token-level view of a sentence: where the subject ends and which token is the main verb.
struct SentenceShape {
  std::vector<std::string> tokens;
  std::vector<std::string> keys;
  std::optional<std::size_t> subject_end;  // index one past the subject phrase
  bool bare_agent = false;                 // opens with "person"/"man"/... without an article
  std::optional<std::size_t> main_verb;
};

inline SentenceShape analyze(std::string_view sentence) {
  SentenceShape shape;
  shape.tokens = text::split_words(sentence);
  for (const auto& t : shape.tokens) shape.keys.push_back(text::key(t));
  const auto& k = shape.keys;
  if (k.empty()) return shape;

  std::size_t scan_from = 0;
  if (words::in(words::pronouns(), k[0])) {
    shape.subject_end = 1;
    scan_from = 1;
  } else if (words::in(words::determiners(), k[0]) && k.size() >= 2 &&
             !words::in(words::determiners(), k[1]) &&
             (!words::is_verb_form(k[1]) || (k.size() > 2 && words::is_verb_form(k[2])))) {
    shape.subject_end = 2;
    scan_from = 1;
  } else if (words::in(words::bare_agents(), k[0])) {
    shape.bare_agent = true;
    scan_from = 1;
  }
  const std::size_t first_scan = shape.subject_end ? *shape.subject_end : scan_from;
  for (std::size_t i = first_scan; i < k.size(); ++i) {
    if (words::is_verb_form(k[i])) {
      shape.main_verb = i;
      break;
    }
  }
  // Determiner subjects may carry modifiers ("A young woman walked"): extend the subject
  // phrase up to the main verb.
  if (shape.subject_end && shape.main_verb && *shape.main_verb > *shape.subject_end) {
    shape.subject_end = *shape.main_verb;
  }
  return shape;
}

namespace detail {

inline bool has_progressive_at(const SentenceShape& s, std::size_t i) {
  return i + 1 < s.keys.size() && words::in(words::present_be(), s.keys[i]) &&
         words::is_participle(s.keys[i + 1]);
}

inline bool is_present_at(const SentenceShape& s, std::size_t i) {
  const auto& w = s.keys[i];
  if (words::in(words::present_be(), w)) return true;
  if (w == "has" || w == "does") return true;
  if (!lexicon::base_from_third_person(w).empty()) return true;
  // Plain base form after I/you/we/they reads as present unless the past coincides.
  if (s.subject_end && i == *s.subject_end && *s.subject_end == 1 &&
      words::in(words::plural_subject_pronouns(), s.keys[0]) && lexicon::is_base_verb(w) &&
      lexicon::past_tense(w) != w) {
    return true;
  }
  return false;
}

// "out the fridge" where "out" does not belong to a phrasal verb ("took out the trash").
inline std::optional<std::size_t> missing_preposition_at(const SentenceShape& s) {
  static const std::unordered_set<std::string> follows{"the", "a", "an", "my", "his", "her",
                                                       "their", "our", "your", "its"};
  for (std::size_t i = 1; i + 1 < s.keys.size(); ++i) {
    if (s.keys[i] == "out" && words::in(follows, s.keys[i + 1]) &&
        !words::is_verb_form(s.keys[i - 1])) {
      return i;
    }
  }
  return std::nullopt;
}

inline bool interrogative_surface(std::string_view trimmed, const SentenceShape& s) {
  if (trimmed.find('?') != std::string_view::npos) return true;
  return !s.keys.empty() && words::in(words::question_openers(), s.keys[0]);
}

}  // namespace detail

inline QueryStyle classify_style(std::string_view raw) {
  const std::string t = text::trim(raw);
  const SentenceShape s = analyze(t);
  if (s.keys.empty()) return QueryStyle::Fragment;
  if (detail::interrogative_surface(t, s)) return QueryStyle::Interrogative;
  const bool opens_with_subject = s.subject_end.has_value() || s.bare_agent;
  if (!opens_with_subject && lexicon::is_base_verb(s.keys[0]) &&
      lexicon::base_from_third_person(s.keys[0]).empty()) {
    return QueryStyle::Imperative;
  }
  if (s.main_verb) {
    const std::size_t i = *s.main_verb;
    if (detail::has_progressive_at(s, i) || detail::is_present_at(s, i)) {
      return QueryStyle::DeclarativePresent;
    }
    if (words::is_participle(s.keys[i])) return QueryStyle::DeclarativePresent;
    if (lexicon::is_past_form(s.keys[i]) || s.keys[i] == "was" || s.keys[i] == "were" ||
        s.keys[i] == "had" || lexicon::is_base_verb(s.keys[i])) {
      return QueryStyle::DeclarativePast;
    }
  }
  return QueryStyle::Fragment;
}

inline CanonicalCheck validate_canonical(std::string_view candidate) {
  CanonicalCheck out;
  auto flag = [&](CanonicalIssue i) {
    if (!out.has(i)) out.issues.push_back(i);
  };
  const std::string t = text::trim(candidate);
  if (t.empty()) {
    flag(CanonicalIssue::Empty);
    return out;
  }
  if (t.find('\n') != std::string::npos) flag(CanonicalIssue::MultipleSentences);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if ((t[i] == '.' || t[i] == '!' || t[i] == '?') &&
        std::isspace(static_cast<unsigned char>(t[i + 1]))) {
      flag(CanonicalIssue::MultipleSentences);
      break;
    }
  }
  if (t.back() != '.') flag(CanonicalIssue::NoTerminalPeriod);

  const SentenceShape s = analyze(t);
  if (detail::interrogative_surface(t, s)) flag(CanonicalIssue::Interrogative);
  if (!std::isupper(static_cast<unsigned char>(t.front()))) flag(CanonicalIssue::NotCapitalized);
  // Questions are rejected outright; subject and tense checks apply to statements.
  if (!out.has(CanonicalIssue::Interrogative) && !s.subject_end) flag(CanonicalIssue::NoSubject);
  if (!out.has(CanonicalIssue::Interrogative) && s.main_verb) {
    const std::size_t i = *s.main_verb;
    if (detail::has_progressive_at(s, i)) {
      flag(CanonicalIssue::PresentProgressive);
    } else if (detail::is_present_at(s, i)) {
      flag(CanonicalIssue::PresentTense);
    }
  }
  for (const auto& k : s.keys) {
    if (words::in(words::vague_placeholders(), k)) flag(CanonicalIssue::VaguePlaceholder);
  }
  if (detail::missing_preposition_at(s)) flag(CanonicalIssue::MissingPreposition);
  out.ok = out.issues.empty();
  return out;
}

}  // namespace vtg
