#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace emojichat {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kSepId = 2;
inline constexpr std::size_t kReservedTokens = 3;
inline constexpr std::size_t kDefaultMaxLen = 100;

// Lowercases ASCII, splits ASCII punctuation into single-character tokens,
// drops emoji code points, and collapses whitespace. The turn separator
// "</s>" survives as one token.
std::vector<std::string> tokenize(std::string_view text);

// Unigram relative frequencies p(w) over every counted token.
using WordFrequencies = std::unordered_map<std::string, double>;

class Vocabulary {
 public:
  Vocabulary();

  // Counts tokens (reserved tokens excluded) and assigns ids to those seen at
  // least min_count times, by descending count then lexicographically.
  static Vocabulary build(std::span<const std::vector<std::string>> corpus, std::size_t min_count);
  static Vocabulary from_counts(std::map<std::string, std::uint64_t> counts, std::size_t min_count);

  TokenId id(std::string_view token) const;  // kUnkId when absent
  const std::string& token(TokenId id) const;
  bool contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  std::size_t min_count() const { return min_count_; }

  std::uint64_t count(std::string_view token) const;
  double probability(std::string_view token) const;
  const WordFrequencies& frequencies() const { return freqs_; }

  // "token<TAB>count" per line for every counted token, highest count first.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(std::istream& in, std::size_t min_count);
  static Vocabulary load(const std::filesystem::path& path, std::size_t min_count);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  std::map<std::string, std::uint64_t> counts_;
  WordFrequencies freqs_;
  std::size_t min_count_ = 1;
};

struct TokenSequence {
  std::vector<TokenId> ids;  // always max_len long
  std::size_t true_length = 0;

  std::span<const TokenId> tokens() const { return {ids.data(), true_length}; }
};

// Keeps the last max_len tokens when too long; right-pads with kPadId.
TokenSequence encode_sequence(std::span<const std::string> tokens, const Vocabulary& vocab,
                              std::size_t max_len = kDefaultMaxLen);
TokenSequence encode_text(std::string_view text, const Vocabulary& vocab,
                          std::size_t max_len = kDefaultMaxLen);
std::vector<std::string> decode_sequence(const TokenSequence& seq, const Vocabulary& vocab);

}  // namespace emojichat
