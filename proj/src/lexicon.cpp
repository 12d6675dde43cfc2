#include "botlab/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

namespace botlab::lexicon {
namespace {

constexpr std::string_view kNouns[] = {
    "time",  "people", "day",     "thing",  "life",    "world",  "school",
    "family", "group", "country", "place",  "week",    "company", "system",
    "question", "work", "government", "number", "night", "home",  "water",
    "room",  "money",  "story",   "month",  "book",    "job",     "business",
    "market", "price", "coin",    "token",  "stock",   "news",    "game",
    "music", "team",   "city",    "phone",  "photo",   "food",    "friend",
    "crypto", "wallet", "chart",  "deal",   "link",    "problem", "scam",
    "profit", "moon"};

constexpr std::string_view kVerbs[] = {
    "buy",   "sell",  "love",   "hate",  "watch",  "read",  "win",
    "lose",  "join",  "follow", "share", "check",  "start", "need",
    "feel",  "try",   "leave",  "call",  "help",   "play",  "run",
    "believe", "hold", "bring", "think", "know",   "see",   "make",
    "get",   "go",    "say",    "want",  "pump",   "dump",  "crash",
    "fail",  "gain"};

constexpr std::string_view kAdjectives[] = {
    "good",  "new",   "first",  "last",  "long",     "great",    "little",
    "old",   "big",   "high",   "small", "large",    "next",     "early",
    "young", "important", "bad", "happy", "sad",     "free",     "best",
    "real",  "huge",  "amazing", "terrible", "awesome", "beautiful", "cheap",
    "hot",   "cool",  "strong", "weak",  "crazy",    "fake",     "angry",
    "worst", "awful", "wrong"};

constexpr std::string_view kFillers[] = {
    "the", "a",  "an",  "and", "or",  "but", "to",   "of",  "in",  "on",
    "at",  "for", "with", "this", "that", "it", "we", "you", "i",  "my",
    "our", "your", "so", "just", "very", "really", "now", "today", "all",
    "some"};

struct ValenceEntry {
  std::string_view word;
  double valence;
};

constexpr ValenceEntry kValence[] = {
    {"good", 0.6},     {"great", 0.8},    {"love", 0.9},     {"happy", 0.8},
    {"best", 0.9},     {"amazing", 0.9},  {"awesome", 0.9},  {"beautiful", 0.8},
    {"win", 0.6},      {"free", 0.4},     {"cool", 0.5},     {"strong", 0.4},
    {"profit", 0.6},   {"gain", 0.5},     {"moon", 0.5},     {"friend", 0.5},
    {"help", 0.4},     {"bad", -0.6},     {"hate", -0.9},    {"sad", -0.7},
    {"terrible", -0.9}, {"lose", -0.6},   {"weak", -0.4},    {"crazy", -0.3},
    {"problem", -0.4}, {"scam", -0.9},    {"fake", -0.7},    {"angry", -0.8},
    {"worst", -0.9},   {"awful", -0.9},   {"wrong", -0.5},   {"fail", -0.7},
    {"crash", -0.7},   {"dump", -0.5}};

std::vector<std::string_view> split_by_sign(bool positive) {
  std::vector<std::string_view> out;
  for (const auto& e : kValence) {
    if ((e.valence > 0) == positive) out.push_back(e.word);
  }
  return out;
}

}  // namespace

std::span<const std::string_view> nouns() { return kNouns; }
std::span<const std::string_view> verbs() { return kVerbs; }
std::span<const std::string_view> adjectives() { return kAdjectives; }
std::span<const std::string_view> fillers() { return kFillers; }

std::optional<PartOfSpeech> part_of_speech(std::string_view word) {
  static const auto table = [] {
    std::unordered_map<std::string_view, PartOfSpeech> t;
    for (auto w : kNouns) t.emplace(w, PartOfSpeech::Noun);
    for (auto w : kVerbs) t.emplace(w, PartOfSpeech::Verb);
    for (auto w : kAdjectives) t.emplace(w, PartOfSpeech::Adjective);
    return t;
  }();
  auto it = table.find(word);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::optional<double> valence(std::string_view word) {
  static const auto table = [] {
    std::unordered_map<std::string_view, double> t;
    for (const auto& e : kValence) t.emplace(e.word, e.valence);
    return t;
  }();
  auto it = table.find(word);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::span<const std::string_view> positive_words() {
  static const auto words = split_by_sign(true);
  return words;
}

std::span<const std::string_view> negative_words() {
  static const auto words = split_by_sign(false);
  return words;
}

std::string normalize_token(std::string_view token) {
  if (token.empty()) return {};
  const char lead = token.front();
  if (lead == '#' || lead == '@' || lead == '$') return {};
  if (token.starts_with("http://") || token.starts_with("https://")) return {};
  auto is_word = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '\'';
  };
  std::size_t b = 0, e = token.size();
  while (b < e && !is_word(token[b])) ++b;
  while (e > b && !is_word(token[e - 1])) --e;
  std::string out(token.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

}  // namespace botlab::lexicon
