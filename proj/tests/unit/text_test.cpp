#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "emojichat/error.hpp"
#include "emojichat/text.hpp"

namespace emojichat {
namespace {

using Tokens = std::vector<std::string>;

TEST(Tokenize, LowercasesAndSplitsPunctuation) {
  EXPECT_EQ(tokenize("I'm SO happy!"), (Tokens{"i", "'", "m", "so", "happy", "!"}));
}

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, DropsEmoji) {
  EXPECT_EQ(tokenize("ok 😂 fine"), (Tokens{"ok", "fine"}));
  EXPECT_EQ(tokenize("love❤️it"), (Tokens{"love", "it"}));
}

TEST(Tokenize, KeepsSeparatorAndCollapsesWhitespace) {
  EXPECT_EQ(tokenize("Hi  there </s>\tyes,\nok"), (Tokens{"hi", "there", "</s>", "yes", ",", "ok"}));
  EXPECT_EQ(tokenize("a</s>b"), (Tokens{"a", "</s>", "b"}));
  EXPECT_EQ(tokenize("Café"), (Tokens{"café"}));
}

Vocabulary vocab_of(const std::vector<Tokens>& docs, std::size_t min_count) {
  return Vocabulary::build(docs, min_count);
}

TEST(Vocabulary, MinCountAndFrequencies) {
  const auto v = vocab_of({{"a", "a", "b"}, {"a"}}, 2);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_FALSE(v.contains("b"));
  EXPECT_DOUBLE_EQ(v.probability("a"), 0.75);
  EXPECT_DOUBLE_EQ(v.probability("b"), 0.25);
  EXPECT_EQ(v.id("b"), kUnkId);
  EXPECT_EQ(v.size(), kReservedTokens + 1);
}

TEST(Vocabulary, ReservedIdsAndOrdering) {
  const auto v = vocab_of({{"b", "c", "a", "c", "</s>", "b", "d"}}, 1);
  EXPECT_EQ(v.token(kPadId), "<pad>");
  EXPECT_EQ(v.token(kUnkId), "<unk>");
  EXPECT_EQ(v.token(kSepId), "</s>");
  EXPECT_EQ(v.id("</s>"), kSepId);
  // counts: b=2 c=2 a=1 d=1
  EXPECT_EQ(v.id("b"), 3);
  EXPECT_EQ(v.id("c"), 4);
  EXPECT_EQ(v.id("a"), 5);
  EXPECT_EQ(v.id("d"), 6);
  EXPECT_EQ(v.count("</s>"), 0u);
}

TEST(Vocabulary, MinCountOneKeepsEverythingAndIsDeterministic) {
  const std::vector<Tokens> docs{{"x", "y", "z"}, {"y", "w"}};
  const auto a = vocab_of(docs, 1);
  const auto b = vocab_of(docs, 1);
  for (const char* t : {"w", "x", "y", "z"}) {
    EXPECT_TRUE(a.contains(t));
    EXPECT_EQ(a.id(t), b.id(t));
  }
  double total = 0.0;
  for (const auto& [w, p] : a.frequencies()) total += p;
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Vocabulary, RejectsEmptyCorpusAndZeroMinCount) {
  EXPECT_THROW(vocab_of({}, 1), ValidationError);
  EXPECT_THROW(vocab_of({{}}, 1), ValidationError);
  EXPECT_THROW(vocab_of({{"a"}}, 0), ValidationError);
}

TEST(Vocabulary, SaveLoadRoundTrip) {
  const auto v = vocab_of({{"the", "cat", "the", "dog", "a"}}, 2);
  std::stringstream buf;
  v.save(buf);
  const auto back = Vocabulary::load(buf, 2);
  ASSERT_EQ(back.size(), v.size());
  for (TokenId i = 0; i < static_cast<TokenId>(v.size()); ++i) EXPECT_EQ(back.token(i), v.token(i));
  EXPECT_DOUBLE_EQ(back.probability("cat"), v.probability("cat"));
}

TEST(Vocabulary, LoadRejectsMalformedLines) {
  std::istringstream bad("a\t3\nb three\n");
  EXPECT_THROW(Vocabulary::load(bad, 1), ParseError);
}

TEST(EncodeSequence, ShortSequenceIsRightPadded) {
  const auto v = vocab_of({{"a", "b", "c"}}, 1);
  const auto s = encode_sequence(Tokens{"a", "b", "c"}, v);
  EXPECT_EQ(s.true_length, 3u);
  ASSERT_EQ(s.ids.size(), 100u);
  for (std::size_t i = 3; i < 100; ++i) EXPECT_EQ(s.ids[i], kPadId);
}

TEST(EncodeSequence, LongSequenceKeepsTheTail) {
  Tokens toks;
  for (int i = 0; i < 120; ++i) toks.push_back("t" + std::to_string(i));
  const auto v = vocab_of({toks}, 1);
  const auto s = encode_sequence(toks, v);
  EXPECT_EQ(s.true_length, 100u);
  EXPECT_EQ(v.token(s.ids.front()), "t20");
  EXPECT_EQ(v.token(s.ids.back()), "t119");
  const Tokens decoded = decode_sequence(s, v);
  EXPECT_EQ(decoded, Tokens(toks.begin() + 20, toks.end()));
}

TEST(EncodeSequence, UnknownTokenMapsToUnk) {
  const auto v = vocab_of({{"a"}}, 1);
  const auto s = encode_sequence(Tokens{"a", "zzz"}, v, 4);
  EXPECT_EQ(s.ids, (std::vector<TokenId>{v.id("a"), kUnkId, kPadId, kPadId}));
}

TEST(EncodeSequence, RejectsZeroMaxLen) {
  const auto v = vocab_of({{"a"}}, 1);
  EXPECT_THROW(encode_sequence(Tokens{"a"}, v, 0), ValidationError);
}

TEST(EncodeSequence, DecodeInvertsInVocabTokens) {
  const auto v = vocab_of({{"i", "am", "so", "happy", "</s>", "me", "too"}}, 1);
  const auto s = encode_text("I am so happy </s> me too", v, 5);
  EXPECT_EQ(decode_sequence(s, v), (Tokens{"so", "happy", "</s>", "me", "too"}));
}

}  // namespace
}  // namespace emojichat
