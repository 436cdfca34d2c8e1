#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "emojichat/corpus.hpp"
#include "emojichat/error.hpp"
#include "synthetic.hpp"

namespace emojichat {
namespace {

using testing::make_conversation;

const char* kTwoTurns =
    R"({"id":"c1","emotion":"joyful","context":"a trip","utterances":[)"
    R"({"speaker":"Speaker","text":"We went to the beach.","emoji":"😀"},)"
    R"({"speaker":"Listener","text":"Sounds fun!"}]})";

TEST(ParseCorpus, TwoUtterancesRoundTrip) {
  std::istringstream in(kTwoTurns);
  const auto convs = parse_corpus(in);
  ASSERT_EQ(convs.size(), 1u);
  const Conversation& c = convs[0];
  EXPECT_EQ(c.id, "c1");
  EXPECT_EQ(c.emotion, "joyful");
  EXPECT_EQ(c.context, "a trip");
  ASSERT_EQ(c.utterances.size(), 2u);
  EXPECT_EQ(c.utterances[0].speaker, Role::Speaker);
  EXPECT_EQ(c.utterances[0].emoji, std::optional<std::string>("😀"));
  EXPECT_EQ(c.utterances[1].speaker, Role::Listener);
  EXPECT_FALSE(c.utterances[1].emoji.has_value());

  std::ostringstream out;
  write_corpus(out, convs);
  std::istringstream again(out.str());
  const auto back = parse_corpus(again);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].utterances[0].text, c.utterances[0].text);
  EXPECT_EQ(back[0].utterances[0].emoji, c.utterances[0].emoji);
  EXPECT_EQ(back[0].utterances[1].text, c.utterances[1].text);
}

std::size_t parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_corpus(in);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(ParseCorpus, UnknownSpeakerNamesTheLine) {
  const std::string bad =
      std::string(kTwoTurns) + "\n" +
      R"({"id":"c2","emotion":"sad","context":"x","utterances":[{"speaker":"Narrator","text":"hi"}]})";
  EXPECT_EQ(parse_error_line(bad), 2u);
}

TEST(ParseCorpus, RejectsMalformedRecords) {
  EXPECT_EQ(parse_error_line("{not json"), 1u);
  EXPECT_EQ(parse_error_line(R"({"id":"c","emotion":"e","context":"x","utterances":[]})"), 1u);
  EXPECT_EQ(parse_error_line(R"({"id":"c","emotion":"e","utterances":[{"speaker":"Speaker","text":"a"}]})"), 1u);
  EXPECT_EQ(parse_error_line(R"({"id":"c","emotion":"e","context":"x","utterances":[{"speaker":"Speaker","text":"  "}]})"), 1u);
  EXPECT_EQ(parse_error_line(R"({"id":"c","emotion":"e","context":"x","utterances":[{"speaker":"Listener","text":"a"}]})"), 1u);
  EXPECT_EQ(parse_error_line(R"({"id":"c","emotion":"e","context":"x","utterances":[{"speaker":"Speaker","text":"a","emoji":"abc"}]})"), 1u);
  const std::string dup = std::string(kTwoTurns) + "\n\n" + kTwoTurns;
  EXPECT_EQ(parse_error_line(dup), 3u);
}

TEST(DerivePairs, SingleListenerTurn) {
  Conversation c;
  c.id = "x";
  c.utterances = {{Role::Speaker, "u1", {}}, {Role::Listener, "r1", {}}};
  const auto pairs = derive_pairs(std::span(&c, 1));
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].context_text, "u1");
  EXPECT_EQ(pairs[0].response_text, "r1");
  EXPECT_EQ(pairs[0].source_conversation, "x");
}

TEST(DerivePairs, ContextIsEveryPriorTurnJoined) {
  Conversation c;
  c.id = "x";
  c.utterances = {{Role::Speaker, "u1", {}}, {Role::Listener, "r1", {}}, {Role::Speaker, "u2", {}},
                  {Role::Listener, "r2", {}}};
  const auto pairs = derive_pairs(std::span(&c, 1));
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[1].context_text, "u1 </s> r1 </s> u2");
  EXPECT_EQ(pairs[1].response_text, "r2");
  EXPECT_EQ(split_turns(pairs[1].context_text), (std::vector<std::string>{"u1", "r1", "u2"}));
}

TEST(DerivePairs, SpeakerOnlyConversationYieldsNothing) {
  const auto c = make_conversation("s", "S");
  EXPECT_TRUE(derive_pairs(std::span(&c, 1)).empty());
}

TEST(DerivePairs, CountMatchesListenerTurnsAndContextsArePrefixes) {
  std::vector<Conversation> convs;
  const char* patterns[] = {"SL", "SLS", "SLSL", "SSL", "SLL", "S", "SLSLSL"};
  std::size_t listeners = 0;
  for (std::size_t i = 0; i < std::size(patterns); ++i) {
    convs.push_back(make_conversation("c" + std::to_string(i), patterns[i]));
    listeners += static_cast<std::size_t>(std::count(patterns[i], patterns[i] + std::strlen(patterns[i]), 'L'));
  }
  const auto pairs = derive_pairs(convs);
  EXPECT_EQ(pairs.size(), listeners);
  for (const auto& p : pairs) {
    const auto it = std::find_if(convs.begin(), convs.end(), [&](const auto& c) { return c.id == p.source_conversation; });
    ASSERT_NE(it, convs.end());
    const auto turns = split_turns(p.context_text);
    ASSERT_LT(turns.size(), it->utterances.size());
    for (std::size_t k = 0; k < turns.size(); ++k) EXPECT_EQ(turns[k], it->utterances[k].text);
    EXPECT_EQ(it->utterances[turns.size()].text, p.response_text);
    EXPECT_EQ(it->utterances[turns.size()].speaker, Role::Listener);
  }
}

TEST(SplitDataset, TenItemsEightyTenTen) {
  const auto s = split_dataset(10, kRetrievalSplit, 7);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.validation.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
}

TEST(SplitDataset, HundredItemsClassifierRatios) {
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    const auto s = split_dataset(100, kClassifierSplit, seed);
    EXPECT_EQ(s.train.size(), 72u);
    EXPECT_EQ(s.validation.size(), 8u);
    EXPECT_EQ(s.test.size(), 20u);
  }
}

TEST(SplitDataset, DeterministicPerSeed) {
  const auto a = split_dataset(57, kRetrievalSplit, 3);
  const auto b = split_dataset(57, kRetrievalSplit, 3);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.test, b.test);
  const auto c = split_dataset(57, kRetrievalSplit, 4);
  EXPECT_NE(a.train, c.train);
}

TEST(SplitDataset, PartitionsEveryIndexOnce) {
  for (std::size_t n = 3; n < 120; n += 7) {
    for (const SplitRatios r : {kRetrievalSplit, kClassifierSplit}) {
      const auto s = split_dataset(n, r, n);
      std::vector<std::size_t> all;
      all.insert(all.end(), s.train.begin(), s.train.end());
      all.insert(all.end(), s.validation.begin(), s.validation.end());
      all.insert(all.end(), s.test.begin(), s.test.end());
      std::sort(all.begin(), all.end());
      std::vector<std::size_t> expected(n);
      std::iota(expected.begin(), expected.end(), 0u);
      EXPECT_EQ(all, expected) << "n=" << n;
      EXPECT_GE(s.validation.size(), 1u);
      EXPECT_GE(s.test.size(), 1u);
      const double nd = static_cast<double>(n);
      if (std::min({r.train, r.validation, r.test}) * nd < 1.0) continue;  // floor of one item dominates
      EXPECT_LE(std::abs(static_cast<double>(s.train.size()) - r.train * nd), 1.0 + 1e-9);
      EXPECT_LE(std::abs(static_cast<double>(s.validation.size()) - r.validation * nd), 1.0 + 1e-9);
      EXPECT_LE(std::abs(static_cast<double>(s.test.size()) - r.test * nd), 1.0 + 1e-9);
    }
  }
}

TEST(SplitDataset, RejectsTooFewItemsAndBadRatios) {
  EXPECT_THROW(split_dataset(2, kRetrievalSplit, 0), ValidationError);
  EXPECT_THROW(split_dataset(10, {0.5, 0.2, 0.2}, 0), ValidationError);
  EXPECT_THROW(split_dataset(10, {0.9, 0.2, -0.1}, 0), ValidationError);
}

TEST(SampleCorpus, PairCountEqualsListenerLines) {
  const auto path = testing::source_dir() / "data" / "sample_corpus.jsonl";
  const auto convs = load_corpus(path);
  EXPECT_GE(convs.size(), 20u);
  std::set<std::string> emotions;
  for (const auto& c : convs) emotions.insert(c.emotion);
  EXPECT_EQ(emotions.size(), 10u);

  // Count Listener tags in the raw text, independent of the parser.
  std::ifstream in(path);
  const std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t listeners = 0;
  for (std::size_t at = raw.find("\"Listener\""); at != std::string::npos; at = raw.find("\"Listener\"", at + 1)) {
    ++listeners;
  }
  EXPECT_EQ(derive_pairs(convs).size(), listeners);
}

}  // namespace
}  // namespace emojichat
