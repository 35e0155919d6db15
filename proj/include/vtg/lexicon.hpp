#pragma once

// English verb lexicon used by the rule-based query canonicalizer and the
// canonical-form validator. Coverage is intentionally finite: irregular verbs
// are listed explicitly, regular verbs are inflected by suffix rules.

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace vtg::lexicon {

inline const std::unordered_map<std::string, std::string>& irregular_past() {
  static const std::unordered_map<std::string, std::string> m{
      {"arise", "arose"},     {"awake", "awoke"},       {"be", "was"},
      {"bear", "bore"},       {"beat", "beat"},         {"become", "became"},
      {"begin", "began"},     {"bend", "bent"},         {"bet", "bet"},
      {"bid", "bid"},         {"bind", "bound"},        {"bite", "bit"},
      {"bleed", "bled"},      {"blow", "blew"},         {"break", "broke"},
      {"breed", "bred"},      {"bring", "brought"},     {"build", "built"},
      {"burn", "burnt"},      {"burst", "burst"},       {"buy", "bought"},
      {"cast", "cast"},       {"catch", "caught"},      {"choose", "chose"},
      {"cling", "clung"},     {"come", "came"},         {"cost", "cost"},
      {"creep", "crept"},     {"cut", "cut"},           {"deal", "dealt"},
      {"dig", "dug"},         {"dive", "dove"},         {"do", "did"},
      {"draw", "drew"},       {"dream", "dreamt"},      {"drink", "drank"},
      {"drive", "drove"},     {"eat", "ate"},           {"fall", "fell"},
      {"feed", "fed"},        {"feel", "felt"},         {"fight", "fought"},
      {"find", "found"},      {"fit", "fit"},           {"flee", "fled"},
      {"fling", "flung"},     {"fly", "flew"},          {"forbid", "forbade"},
      {"forget", "forgot"},   {"forgive", "forgave"},   {"freeze", "froze"},
      {"get", "got"},         {"give", "gave"},         {"go", "went"},
      {"grind", "ground"},    {"grow", "grew"},         {"hang", "hung"},
      {"have", "had"},        {"hear", "heard"},        {"hide", "hid"},
      {"hit", "hit"},         {"hold", "held"},         {"hurt", "hurt"},
      {"keep", "kept"},       {"kneel", "knelt"},       {"knit", "knit"},
      {"know", "knew"},       {"lay", "laid"},          {"lead", "led"},
      {"lean", "leant"},      {"leap", "leapt"},        {"learn", "learnt"},
      {"leave", "left"},      {"lend", "lent"},         {"let", "let"},
      {"lie", "lay"},         {"light", "lit"},         {"lose", "lost"},
      {"make", "made"},       {"mean", "meant"},        {"meet", "met"},
      {"mislay", "mislaid"},  {"mistake", "mistook"},   {"mow", "mowed"},
      {"overcome", "overcame"}, {"overtake", "overtook"}, {"pay", "paid"},
      {"prove", "proved"},    {"put", "put"},           {"quit", "quit"},
      {"read", "read"},       {"rebuild", "rebuilt"},   {"redo", "redid"},
      {"remake", "remade"},   {"rewind", "rewound"},    {"rewrite", "rewrote"},
      {"rid", "rid"},         {"ride", "rode"},         {"ring", "rang"},
      {"rise", "rose"},       {"run", "ran"},           {"saw", "sawed"},
      {"say", "said"},        {"see", "saw"},           {"seek", "sought"},
      {"sell", "sold"},       {"send", "sent"},         {"set", "set"},
      {"sew", "sewed"},       {"shake", "shook"},       {"shed", "shed"},
      {"shine", "shone"},     {"shoot", "shot"},        {"show", "showed"},
      {"shrink", "shrank"},   {"shut", "shut"},         {"sing", "sang"},
      {"sink", "sank"},       {"sit", "sat"},           {"sleep", "slept"},
      {"slide", "slid"},      {"sling", "slung"},       {"slit", "slit"},
      {"sow", "sowed"},       {"speak", "spoke"},       {"speed", "sped"},
      {"spend", "spent"},     {"spill", "spilt"},       {"spin", "spun"},
      {"spit", "spat"},       {"split", "split"},       {"spread", "spread"},
      {"spring", "sprang"},   {"stand", "stood"},       {"steal", "stole"},
      {"stick", "stuck"},     {"sting", "stung"},       {"stink", "stank"},
      {"stride", "strode"},   {"strike", "struck"},     {"string", "strung"},
      {"strive", "strove"},   {"swear", "swore"},       {"sweep", "swept"},
      {"swell", "swelled"},   {"swim", "swam"},         {"swing", "swung"},
      {"take", "took"},       {"teach", "taught"},      {"tear", "tore"},
      {"tell", "told"},       {"think", "thought"},     {"throw", "threw"},
      {"thrust", "thrust"},   {"tread", "trod"},        {"undergo", "underwent"},
      {"understand", "understood"}, {"undo", "undid"},  {"unwind", "unwound"},
      {"uphold", "upheld"},   {"upset", "upset"},       {"wake", "woke"},
      {"wear", "wore"},       {"weave", "wove"},        {"weep", "wept"},
      {"wet", "wet"},         {"win", "won"},           {"wind", "wound"},
      {"withdraw", "withdrew"}, {"wring", "wrung"},     {"write", "wrote"},
      {"sweat", "sweat"},     {"broadcast", "broadcast"}, {"slay", "slew"},
      {"overhear", "overheard"}, {"upload", "uploaded"}, {"outrun", "outran"},
      {"foresee", "foresaw"}, {"mislead", "misled"},    {"sublet", "sublet"},
      {"shear", "sheared"},   {"partake", "partook"},   {"behold", "beheld"},
      {"bring", "brought"},   {"withhold", "withheld"}, {"input", "input"},
  };
  return m;
}

inline const std::unordered_set<std::string>& regular_verbs() {
  static const std::unordered_set<std::string> s{
      "add",      "adjust",   "apply",    "arrange",  "attach",   "bake",     "blend",
      "boil",     "brush",    "carry",    "change",   "check",    "chop",     "clean",
      "clear",    "climb",    "close",    "collect",  "comb",     "connect",  "cook",
      "cover",    "crack",    "cross",    "crush",    "dance",    "decorate", "dice",
      "dip",      "drag",     "dress",    "drip",     "drop",     "dry",      "dust",
      "empty",    "enter",    "exit",     "fill",     "finish",   "fix",      "flip",
      "fold",     "fry",      "glue",     "grab",     "grate",    "grill",    "hammer",
      "hand",     "help",     "hug",      "insert",   "iron",     "jump",     "kick",
      "kiss",     "knead",    "knock",    "laugh",    "lift",     "like",     "listen",
      "load",     "lock",     "look",     "loosen",   "mark",     "mash",     "measure",
      "melt",     "mix",      "move",     "nod",      "open",     "pack",     "paint",
      "park",     "pass",     "paste",    "pat",      "peel",     "pet",      "pick",
      "place",    "plant",    "play",     "plug",     "point",    "polish",   "pour",
      "prepare",  "press",    "pull",     "pump",     "punch",    "push",     "race",
      "raise",    "reach",    "remove",   "repair",   "replace",  "rinse",    "roll",
      "rub",      "save",     "scoop",    "scrape",   "scrub",    "season",   "serve",
      "shave",    "shop",     "shovel",   "sip",      "skate",    "ski",      "slice",
      "smile",    "smell",    "sneeze",   "soak",     "sort",     "spray",    "sprinkle",
      "squeeze",  "stack",    "start",    "step",     "stir",     "stop",     "store",
      "strain",   "stretch",  "stuff",    "switch",   "talk",     "tap",      "taste",
      "tie",      "tighten",  "toss",     "touch",    "transfer", "trim",     "try",
      "turn",     "twist",    "type",     "unlock",   "unpack",   "unplug",   "use",
      "vacuum",   "walk",     "wash",     "watch",    "water",    "wave",     "wax",
      "weigh",    "whisk",    "wipe",     "work",     "wrap",     "yell",     "zip",
      "answer",   "ask",      "call",     "film",     "jog",      "kneel",    "lie",
      "organize", "pedal",    "pinch",    "practice", "rake",     "rest",     "roast",
      "sand",     "screw",    "seal",     "sharpen",  "sign",     "smoke",    "spoon",
      "squat",    "steam",    "sweeten",  "tape",     "tilt",     "tow",      "unfold",
      "unscrew",  "unzip",    "wait",     "wander",   "whip",     "wrestle",  "drill",
      "examine",  "fetch",    "flatten",  "hop",      "juggle",   "lick",     "mop",
      "nail",     "poke",     "pose",     "rearrange", "return",  "rotate",   "scan",
      "scratch",  "shuffle",  "slam",     "slip",     "snap",     "spread",   "stroll",
      "surf",     "swipe",    "tidy",     "tug",      "unroll",   "wipe",     "wring",
  };
  return s;
}

inline bool is_base_verb(std::string_view w) {
  const std::string k(w);
  return irregular_past().count(k) > 0 || regular_verbs().count(k) > 0;
}

namespace detail {

inline bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// Monosyllabic consonant-vowel-consonant stems double their final consonant.
inline bool doubles_final(const std::string& w) {
  static const std::string doubling = "bdglmnprt";
  if (w.size() < 3) return false;
  const char c3 = w[w.size() - 1], v = w[w.size() - 2], c1 = w[w.size() - 3];
  if (doubling.find(c3) == std::string::npos) return false;
  if (!is_vowel(v) || is_vowel(c1)) return false;
  int vowel_groups = 0;
  bool prev = false;
  for (char c : w) {
    const bool cur = is_vowel(c);
    if (cur && !prev) ++vowel_groups;
    prev = cur;
  }
  return vowel_groups == 1;
}

}  // namespace detail

// Past tense of a base-form verb. Unknown words are inflected by suffix rules.
inline std::string past_tense(std::string_view base) {
  const std::string w(base);
  if (auto it = irregular_past().find(w); it != irregular_past().end()) return it->second;
  if (w.empty()) return w;
  if (w.back() == 'e') return w + "d";
  if (w.size() >= 2 && w.back() == 'y' && !detail::is_vowel(w[w.size() - 2])) {
    return w.substr(0, w.size() - 1) + "ied";
  }
  if (detail::doubles_final(w)) return w + w.back() + "ed";
  return w + "ed";
}

// Maps a third-person singular present form ("takes", "washes", "tries") to its base.
inline std::string base_from_third_person(std::string_view word) {
  const std::string w(word);
  if (w == "is") return "be";
  if (w == "has") return "have";
  if (w == "does") return "do";
  if (w == "goes") return "go";
  if (w.size() < 3 || w.back() != 's' || w[w.size() - 2] == 's') return {};
  if (w.size() > 3 && w.compare(w.size() - 3, 3, "ies") == 0) {
    std::string b = w.substr(0, w.size() - 3) + "y";
    if (is_base_verb(b)) return b;
  }
  if (w.size() > 3 && w.compare(w.size() - 2, 2, "es") == 0) {
    std::string b = w.substr(0, w.size() - 2);
    if (is_base_verb(b)) return b;
  }
  std::string b = w.substr(0, w.size() - 1);
  if (is_base_verb(b)) return b;
  return {};
}

// Maps a present participle ("walking", "chopping", "taking") to its base.
inline std::string base_from_participle(std::string_view word) {
  const std::string w(word);
  if (w.size() < 5 || w.compare(w.size() - 3, 3, "ing") != 0) return {};
  const std::string stem = w.substr(0, w.size() - 3);
  if (is_base_verb(stem)) return stem;
  if (is_base_verb(stem + "e")) return stem + "e";
  if (stem.size() >= 2 && stem.back() == stem[stem.size() - 2]) {
    std::string undoubled = stem.substr(0, stem.size() - 1);
    if (is_base_verb(undoubled)) return undoubled;
  }
  if (stem.size() >= 2 && stem.back() == 'y' && is_base_verb(stem.substr(0, stem.size() - 1) + "ie")) {
    return stem.substr(0, stem.size() - 1) + "ie";
  }
  // Unknown verbs: keep the stem as-is; callers then inflect by rule.
  return stem;
}

inline bool is_past_form(std::string_view word) {
  const std::string w(word);
  for (const auto& [base, past] : irregular_past()) {
    if (past == w) return true;
  }
  if (w.size() > 3 && w.compare(w.size() - 2, 2, "ed") == 0) return true;
  return false;
}

}  // namespace vtg::lexicon
