#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace botlab::lexicon {

enum class PartOfSpeech { Noun, Verb, Adjective };

/// Small closed-class English lexicon. Word lists are disjoint.
std::span<const std::string_view> nouns();
std::span<const std::string_view> verbs();
std::span<const std::string_view> adjectives();
/// Words with no part-of-speech or valence entry (filler for generated text).
std::span<const std::string_view> fillers();

std::optional<PartOfSpeech> part_of_speech(std::string_view word);

/// Valence in [-1, 1] for words in the sentiment lexicon.
std::optional<double> valence(std::string_view word);
std::span<const std::string_view> positive_words();
std::span<const std::string_view> negative_words();

/// Lowercases and strips leading/trailing punctuation. Returns an empty
/// string for hashtags, mentions, cashtags and URLs, which carry no lexicon
/// information.
std::string normalize_token(std::string_view token);

}  // namespace botlab::lexicon
