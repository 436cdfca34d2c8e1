#include "emojichat/text.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "emojichat/corpus.hpp"
#include "emojichat/error.hpp"
#include "emojichat/unicode.hpp"

namespace emojichat {

namespace {

const std::string kReserved[kReservedTokens] = {"<pad>", "<unk>", std::string(kTurnSeparator)};

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0x00A0 || cp == 0x3000;
}

bool is_ascii_punct(char32_t cp) {
  return cp < 0x80 && ((cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
                       (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E));
}

bool starts_with_separator(const std::vector<char32_t>& cps, std::size_t i) {
  if (i + kTurnSeparator.size() > cps.size()) return false;
  for (std::size_t k = 0; k < kTurnSeparator.size(); ++k) {
    if (cps[i + k] != static_cast<char32_t>(kTurnSeparator[k])) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  const auto cps = unicode::decode_utf8(text);
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.push_back(std::move(word));
    word.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (is_space(cp) || unicode::is_emoji_codepoint(cp)) {
      flush();
    } else if (cp == '<' && starts_with_separator(cps, i)) {
      flush();
      out.emplace_back(kTurnSeparator);
      i += kTurnSeparator.size() - 1;
    } else if (is_ascii_punct(cp)) {
      flush();
      out.emplace_back(1, static_cast<char>(cp));
    } else if (cp == 0xFFFD) {
      continue;
    } else if (cp >= 'A' && cp <= 'Z') {
      word.push_back(static_cast<char>(cp - 'A' + 'a'));
    } else {
      unicode::append_utf8(word, cp);
    }
  }
  flush();
  return out;
}

Vocabulary::Vocabulary() {
  for (std::size_t i = 0; i < kReservedTokens; ++i) {
    ids_.emplace(kReserved[i], static_cast<TokenId>(i));
    tokens_.push_back(kReserved[i]);
  }
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> corpus, std::size_t min_count) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& sentence : corpus) {
    for (const auto& tok : sentence) {
      if (tok == kReserved[0] || tok == kReserved[1] || tok == kReserved[2]) continue;
      ++counts[tok];
    }
  }
  return from_counts(std::move(counts), min_count);
}

Vocabulary Vocabulary::from_counts(std::map<std::string, std::uint64_t> counts, std::size_t min_count) {
  if (min_count < 1) throw ValidationError("min_count must be at least 1");
  std::uint64_t total = 0;
  for (const auto& [tok, c] : counts) total += c;
  if (total == 0) throw ValidationError("cannot build a vocabulary from an empty corpus");

  Vocabulary vocab;
  vocab.min_count_ = min_count;
  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [tok, c] : ranked) {
    vocab.freqs_[tok] = static_cast<double>(c) / static_cast<double>(total);
    if (c >= min_count) {
      vocab.ids_.emplace(tok, static_cast<TokenId>(vocab.tokens_.size()));
      vocab.tokens_.push_back(tok);
    }
  }
  vocab.counts_ = std::move(counts);
  return vocab;
}

TokenId Vocabulary::id(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ValidationError("token id out of range: " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.contains(std::string(token));
}

std::uint64_t Vocabulary::count(std::string_view token) const {
  const auto it = counts_.find(std::string(token));
  return it == counts_.end() ? 0 : it->second;
}

double Vocabulary::probability(std::string_view token) const {
  const auto it = freqs_.find(std::string(token));
  return it == freqs_.end() ? 0.0 : it->second;
}

void Vocabulary::save(std::ostream& out) const {
  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts_.begin(), counts_.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [tok, c] : ranked) out << tok << '\t' << c << '\n';
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write vocabulary " + path.string());
  save(out);
}

Vocabulary Vocabulary::load(std::istream& in, std::size_t min_count) {
  std::map<std::string, std::uint64_t> counts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) throw ParseError(lineno, "expected token<TAB>count");
    std::uint64_t c = 0;
    try {
      std::size_t used = 0;
      c = std::stoull(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad count");
    }
    if (!counts.emplace(line.substr(0, tab), c).second) throw ParseError(lineno, "duplicate token");
  }
  return from_counts(std::move(counts), min_count);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path, std::size_t min_count) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vocabulary " + path.string());
  return load(in, min_count);
}

TokenSequence encode_sequence(std::span<const std::string> tokens, const Vocabulary& vocab,
                              std::size_t max_len) {
  if (max_len < 1) throw ValidationError("max_len must be at least 1");
  const std::size_t keep = std::min(tokens.size(), max_len);
  const std::size_t start = tokens.size() - keep;
  TokenSequence seq;
  seq.ids.assign(max_len, kPadId);
  seq.true_length = keep;
  for (std::size_t i = 0; i < keep; ++i) seq.ids[i] = vocab.id(tokens[start + i]);
  return seq;
}

TokenSequence encode_text(std::string_view text, const Vocabulary& vocab, std::size_t max_len) {
  const auto toks = tokenize(text);
  return encode_sequence(toks, vocab, max_len);
}

std::vector<std::string> decode_sequence(const TokenSequence& seq, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(seq.true_length);
  for (TokenId id : seq.tokens()) out.push_back(vocab.token(id));
  return out;
}

}  // namespace emojichat
