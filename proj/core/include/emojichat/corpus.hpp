#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emojichat {

enum class Role { Speaker, Listener };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);  // throws ValidationError

struct Utterance {
  Role speaker = Role::Speaker;
  std::string text;
  std::optional<std::string> emoji;

  bool operator==(const Utterance&) const = default;
};

struct Conversation {
  std::string id;
  std::string emotion;
  std::string context;  // situation description
  std::vector<Utterance> utterances;

  bool operator==(const Conversation&) const = default;
};

// A listener turn paired with everything said before it.
struct ContextResponsePair {
  std::string context_text;
  std::string response_text;
  std::string source_conversation;
};

// Reserved token joining prior turns into one context string.
inline constexpr std::string_view kTurnSeparator = "</s>";

// One JSON object per line; blank lines are skipped. Throws ParseError
// carrying the 1-based line number and the offending field.
std::vector<Conversation> parse_corpus(std::istream& in);
std::vector<Conversation> load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, std::span<const Conversation> conversations);

// One pair per Listener turn; the context concatenates every earlier turn of
// either speaker, joined by " <separator> ".
std::vector<ContextResponsePair> derive_pairs(std::span<const Conversation> conversations,
                                              std::string_view separator = kTurnSeparator);

std::string join_turns(std::span<const std::string> turns,
                       std::string_view separator = kTurnSeparator);
std::vector<std::string> split_turns(std::string_view context,
                                     std::string_view separator = kTurnSeparator);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

inline constexpr SplitRatios kRetrievalSplit{0.8, 0.1, 0.1};
inline constexpr SplitRatios kClassifierSplit{0.72, 0.08, 0.20};

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

// Seeded permutation of 0..n-1 cut into three parts. Part sizes follow the
// largest-remainder rule, then every part is bumped to at least one element.
DatasetSplit split_dataset(std::size_t n, SplitRatios ratios, std::uint64_t seed);

template <typename T>
std::vector<T> select(std::span<const T> items, std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(items[i]);
  return out;
}

}  // namespace emojichat
