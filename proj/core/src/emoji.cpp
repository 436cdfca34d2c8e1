#include "emojichat/emoji.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include <nlohmann/json.hpp>

#include "emojichat/error.hpp"
#include "emojichat/unicode.hpp"

namespace emojichat {

void EmojiMap::add_bucket(std::string emotion, std::vector<EmojiEntry> bucket) {
  if (bucket.empty()) throw ValidationError("emotion \"" + emotion + "\" has an empty emoji bucket");
  if (contains(emotion)) throw ValidationError("emotion \"" + emotion + "\" listed twice");
  buckets_.emplace_back(std::move(emotion), std::move(bucket));
}

const std::vector<EmojiEntry>& EmojiMap::bucket(std::string_view emotion) const {
  for (const auto& [e, b] : buckets_) {
    if (e == emotion) return b;
  }
  throw ValidationError("no emoji bucket for emotion \"" + std::string(emotion) + "\"");
}

bool EmojiMap::contains(std::string_view emotion) const {
  return std::any_of(buckets_.begin(), buckets_.end(), [&](const auto& b) { return b.first == emotion; });
}

std::vector<std::string> EmojiMap::emotions() const {
  std::vector<std::string> out;
  for (const auto& [e, b] : buckets_) out.push_back(e);
  return out;
}

EmojiMap load_emoji_map(std::istream& in, const WordVectorTable& table, std::span<const std::string> label_set) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("emoji map: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError(0, "emoji map must be an object keyed by emotion");

  EmojiMap map;
  for (const auto& [emotion, entries] : doc.items()) {
    if (!label_set.empty() && std::find(label_set.begin(), label_set.end(), emotion) == label_set.end()) {
      throw ValidationError("emoji map names unknown emotion \"" + emotion + "\"");
    }
    if (!entries.is_array()) throw ParseError(0, "bucket for \"" + emotion + "\" must be an array");
    std::vector<EmojiEntry> bucket;
    for (const auto& e : entries) {
      if (!e.is_object() || !e.contains("emoji") || !e["emoji"].is_string() || !e.contains("keywords") ||
          !e["keywords"].is_array()) {
        throw ParseError(0, "entry in \"" + emotion + "\" needs a string 'emoji' and an array 'keywords'");
      }
      EmojiEntry entry;
      entry.emoji = e["emoji"].get<std::string>();
      if (!unicode::is_emoji_grapheme(entry.emoji)) {
        throw ValidationError("\"" + entry.emoji + "\" in \"" + emotion + "\" is not an emoji");
      }
      for (const auto& k : e["keywords"]) {
        if (!k.is_string()) throw ParseError(0, "keywords of " + entry.emoji + " must be strings");
        entry.keywords.push_back(k.get<std::string>());
      }
      if (entry.keywords.empty()) throw ValidationError("emoji " + entry.emoji + " has no keywords");
      try {
        entry.vector = compose_emoji_vector(entry.keywords, table);
      } catch (const ValidationError& err) {
        throw ValidationError("emoji " + entry.emoji + " (" + emotion + "): " + err.what());
      }
      bucket.push_back(std::move(entry));
    }
    map.add_bucket(emotion, std::move(bucket));
  }
  for (const auto& label : label_set) {
    if (!map.contains(label)) throw ValidationError("emoji map has no bucket for emotion \"" + label + "\"");
  }
  return map;
}

EmojiMap load_emoji_map(const std::filesystem::path& path, const WordVectorTable& table,
                        std::span<const std::string> label_set) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open emoji map " + path.string());
  return load_emoji_map(in, table, label_set);
}

EmojiChoice select_from_bucket(const Vector& sentence, std::span<const EmojiEntry> bucket, double threshold) {
  EmojiChoice choice;
  choice.threshold_used = threshold;
  if (bucket.empty()) throw ValidationError("empty emoji bucket");
  if (sentence.norm() == 0.0) return choice;
  double best = -2.0;
  for (std::size_t i = 0; i < bucket.size(); ++i) {
    const double c = cosine(sentence, bucket[i].vector);
    if (c > best) {
      best = c;
      choice.best_index = i;
    }
  }
  choice.similarity = best;
  if (best >= threshold) choice.emoji = bucket[*choice.best_index].emoji;
  return choice;
}

EmojiChoice select_emoji(std::string_view response_text, std::string_view emotion, const EmojiMap& map,
                         const SifSettings& sif, double threshold) {
  if (!sif.table || !sif.frequencies) throw ValidationError("select_emoji needs a word table and frequencies");
  const auto& bucket = map.bucket(emotion);
  const auto tokens = tokenize(response_text);
  const SentenceVector s = sif_embed(tokens, *sif.table, *sif.frequencies, sif.a, sif.principal);
  EmojiChoice choice = select_from_bucket(s.values, bucket, threshold);
  choice.emotion = std::string(emotion);
  return choice;
}

std::string append_emoji(std::string_view text, const EmojiChoice& choice) {
  std::string out(text);
  if (choice.emoji && !text.empty()) {
    out += ' ';
    out += *choice.emoji;
  }
  return out;
}

}  // namespace emojichat
