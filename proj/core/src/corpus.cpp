#include "emojichat/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "emojichat/error.hpp"
#include "emojichat/unicode.hpp"

namespace emojichat {

using nlohmann::json;

std::string_view to_string(Role role) {
  return role == Role::Speaker ? "Speaker" : "Listener";
}

Role role_from_string(std::string_view s) {
  if (s == "Speaker") return Role::Speaker;
  if (s == "Listener") return Role::Listener;
  throw ValidationError("unknown speaker tag \"" + std::string(s) + "\"");
}

namespace {

std::string require_string(const json& obj, const char* field, std::size_t line) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw ParseError(line, std::string("missing field '") + field + "'");
  if (!it->is_string()) throw ParseError(line, std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

Utterance parse_utterance(const json& u, std::size_t line, std::size_t index) {
  const std::string where = "utterances[" + std::to_string(index) + "]";
  if (!u.is_object()) throw ParseError(line, where + " must be an object");
  Utterance out;
  const std::string speaker = require_string(u, "speaker", line);
  try {
    out.speaker = role_from_string(speaker);
  } catch (const ValidationError& e) {
    throw ParseError(line, where + ".speaker: " + e.what());
  }
  out.text = require_string(u, "text", line);
  if (unicode::trim(out.text).empty()) throw ParseError(line, where + ".text is empty");
  if (const auto it = u.find("emoji"); it != u.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError(line, where + ".emoji must be a string");
    std::string emoji = it->get<std::string>();
    if (!unicode::is_emoji_grapheme(emoji)) {
      throw ParseError(line, where + ".emoji is not an emoji: \"" + emoji + "\"");
    }
    out.emoji = std::move(emoji);
  }
  return out;
}

}  // namespace

std::vector<Conversation> parse_corpus(std::istream& in) {
  std::vector<Conversation> out;
  std::unordered_set<std::string> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (unicode::trim(raw).empty()) continue;
    json record;
    try {
      record = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("invalid record: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(line, "record must be an object");

    Conversation conv;
    conv.id = require_string(record, "id", line);
    conv.emotion = require_string(record, "emotion", line);
    conv.context = require_string(record, "context", line);
    const auto utts = record.find("utterances");
    if (utts == record.end()) throw ParseError(line, "missing field 'utterances'");
    if (!utts->is_array()) throw ParseError(line, "field 'utterances' must be an array");
    if (utts->empty()) throw ParseError(line, "field 'utterances' is empty");
    for (std::size_t i = 0; i < utts->size(); ++i) {
      conv.utterances.push_back(parse_utterance((*utts)[i], line, i));
    }
    if (conv.utterances.front().speaker != Role::Speaker) {
      throw ParseError(line, "utterances[0].speaker must be Speaker");
    }
    if (!seen.insert(conv.id).second) throw ParseError(line, "duplicate id \"" + conv.id + "\"");
    out.push_back(std::move(conv));
  }
  return out;
}

std::vector<Conversation> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path.string());
  return parse_corpus(in);
}

void write_corpus(std::ostream& out, std::span<const Conversation> conversations) {
  for (const auto& conv : conversations) {
    json utts = json::array();
    for (const auto& u : conv.utterances) {
      json j{{"speaker", to_string(u.speaker)}, {"text", u.text}};
      if (u.emoji) j["emoji"] = *u.emoji;
      utts.push_back(std::move(j));
    }
    json record{{"id", conv.id},
                {"emotion", conv.emotion},
                {"context", conv.context},
                {"utterances", std::move(utts)}};
    out << record.dump() << '\n';
  }
}

std::string join_turns(std::span<const std::string> turns, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (i) {
      out += ' ';
      out += separator;
      out += ' ';
    }
    out += turns[i];
  }
  return out;
}

std::vector<std::string> split_turns(std::string_view context, std::string_view separator) {
  std::string delim = " ";
  delim += separator;
  delim += ' ';
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = context.find(delim, pos);
    if (next == std::string_view::npos) {
      out.emplace_back(context.substr(pos));
      break;
    }
    out.emplace_back(context.substr(pos, next - pos));
    pos = next + delim.size();
  }
  return out;
}

std::vector<ContextResponsePair> derive_pairs(std::span<const Conversation> conversations,
                                              std::string_view separator) {
  std::vector<ContextResponsePair> out;
  for (const auto& conv : conversations) {
    std::vector<std::string> prior;
    bool has_speaker = false;
    for (const auto& u : conv.utterances) {
      if (u.speaker == Role::Listener && has_speaker) {
        out.push_back({join_turns(prior, separator), u.text, conv.id});
      }
      has_speaker |= u.speaker == Role::Speaker;
      prior.push_back(u.text);
    }
  }
  return out;
}

DatasetSplit split_dataset(std::size_t n, SplitRatios ratios, std::uint64_t seed) {
  if (n < 3) throw ValidationError("split_dataset needs at least 3 items, got " + std::to_string(n));
  const double parts[3] = {ratios.train, ratios.validation, ratios.test};
  for (double r : parts) {
    if (!(r > 0.0)) throw ValidationError("split ratios must be positive");
  }
  if (std::abs(parts[0] + parts[1] + parts[2] - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1");
  }

  // Largest remainder; the epsilon keeps 100 * 0.72 from flooring to 71.
  std::size_t sizes[3];
  double frac[3];
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = static_cast<double>(n) * parts[k];
    sizes[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[k] = exact - static_cast<double>(sizes[k]);
    assigned += sizes[k];
  }
  int order[3] = {0, 1, 2};
  std::stable_sort(order, order + 3, [&](int a, int b) { return frac[a] > frac[b]; });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++sizes[order[r % 3]];
  for (int k = 0; k < 3; ++k) {
    if (sizes[k] == 0) {
      auto* largest = std::max_element(sizes, sizes + 3);
      --*largest;
      sizes[k] = 1;
    }
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  DatasetSplit split;
  split.seed = seed;
  auto it = perm.begin();
  split.train.assign(it, it + static_cast<std::ptrdiff_t>(sizes[0]));
  it += static_cast<std::ptrdiff_t>(sizes[0]);
  split.validation.assign(it, it + static_cast<std::ptrdiff_t>(sizes[1]));
  it += static_cast<std::ptrdiff_t>(sizes[1]);
  split.test.assign(it, perm.end());
  return split;
}

}  // namespace emojichat
