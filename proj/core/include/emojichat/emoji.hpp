#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emojichat/embeddings.hpp"
#include "emojichat/text.hpp"

namespace emojichat {

inline constexpr double kDefaultEmojiThreshold = 0.3;

struct EmojiEntry {
  std::string emoji;
  std::vector<std::string> keywords;
  Vector vector;  // composed from keywords, unit norm
};

// Emotion label -> ordered bucket of emojis. Bucket order is the tie-break.
class EmojiMap {
 public:
  void add_bucket(std::string emotion, std::vector<EmojiEntry> bucket);
  const std::vector<EmojiEntry>& bucket(std::string_view emotion) const;  // throws ValidationError
  bool contains(std::string_view emotion) const;
  std::vector<std::string> emotions() const;
  std::size_t size() const { return buckets_.size(); }

 private:
  std::vector<std::pair<std::string, std::vector<EmojiEntry>>> buckets_;
};

// JSON object: { "<emotion>": [ {"emoji": "...", "keywords": ["..", ..]}, ... ], ... }.
// Every label in label_set must have a non-empty bucket and the map may not
// name emotions outside it. An empty label_set skips that check.
EmojiMap load_emoji_map(std::istream& in, const WordVectorTable& table,
                        std::span<const std::string> label_set = {});
EmojiMap load_emoji_map(const std::filesystem::path& path, const WordVectorTable& table,
                        std::span<const std::string> label_set = {});

struct SifSettings {
  const WordVectorTable* table = nullptr;
  const WordFrequencies* frequencies = nullptr;
  double a = kDefaultSifSmoothing;
  const Vector* principal = nullptr;
};

struct EmojiChoice {
  std::optional<std::string> emoji;  // present iff similarity >= threshold_used
  double similarity = -1.0;
  std::string emotion;
  double threshold_used = kDefaultEmojiThreshold;
  std::optional<std::size_t> best_index;  // bucket argmax, attached or not
};

// Argmax of cosine(sentence, entry) over the bucket, first entry on ties.
// A zero sentence vector yields no emoji with similarity -1.
EmojiChoice select_from_bucket(const Vector& sentence, std::span<const EmojiEntry> bucket, double threshold);

EmojiChoice select_emoji(std::string_view response_text, std::string_view emotion, const EmojiMap& map,
                         const SifSettings& sif, double threshold = kDefaultEmojiThreshold);

// text + " " + emoji when an emoji was chosen and text is non-empty.
std::string append_emoji(std::string_view text, const EmojiChoice& choice);

}  // namespace emojichat
