#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "emojichat/error.hpp"
#include "emojichat/eval.hpp"
#include "oracle.hpp"

namespace emojichat {
namespace {

using Tokens = std::vector<std::string>;

Tokens words(const std::string& s) {
  Tokens out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

BleuScores bleu_of(const std::string& cand, const std::string& ref) { return bleu(words(cand), words(ref)); }

void expect_bleu(const BleuScores& s, std::initializer_list<double> expected) {
  ASSERT_EQ(s.bleu.size(), expected.size());
  std::size_t i = 0;
  double sum = 0.0;
  for (double e : expected) {
    EXPECT_NEAR(s.bleu[i++], e, 1e-9) << "BLEU-" << i;
    sum += e;
  }
  EXPECT_NEAR(s.average, sum / 4.0, 1e-9);
}

TEST(Bleu, IdenticalThreeWords) {
  // p1..p3 = 1; no 4-grams so p4 = 1/(2*3).
  const auto s = bleu_of("the cat sat", "the cat sat");
  expect_bleu(s, {1.0, 1.0, 1.0, std::pow(1.0 / 6.0, 0.25)});
  EXPECT_DOUBLE_EQ(s.brevity_penalty, 1.0);
}

TEST(Bleu, ClippedRepeatedWord) {
  // p1 = 1/3 (clipped); p2..p4 zero -> 1/6.
  const auto s = bleu_of("the the the", "the cat");
  EXPECT_NEAR(s.precisions[0], 1.0 / 3.0, 1e-12);
  const double f = 1.0 / 6.0;
  expect_bleu(s, {1.0 / 3.0, std::sqrt(f / 3.0), std::cbrt(f * f / 3.0), std::pow(f * f * f / 3.0, 0.25)});
}

TEST(Bleu, BrevityPenaltyOnShortCandidate) {
  // c = 3, r = 6: BP = e^{1-2}; p1..p3 = 1, p4 = 1/6.
  const auto s = bleu_of("a b c", "a b c d e f");
  const double bp = std::exp(-1.0);
  EXPECT_NEAR(s.brevity_penalty, bp, 1e-12);
  expect_bleu(s, {bp, bp, bp, bp * std::pow(1.0 / 6.0, 0.25)});
}

TEST(Bleu, OneSubstitution) {
  // p1 = 3/4, p2 = 1/3, p3 = p4 = 0 -> 1/8.
  const auto s = bleu_of("a b c d", "a b x d");
  const double f = 1.0 / 8.0;
  expect_bleu(s, {0.75, std::sqrt(0.75 / 3.0), std::cbrt(0.75 / 3.0 * f), std::pow(0.75 / 3.0 * f * f, 0.25)});
}

TEST(Bleu, ReorderedWords) {
  // unigrams 4/4; bigrams {aa, ab, bb} vs {ab, ba, ab}: 1/3; p3 = p4 = 1/8.
  const auto s = bleu_of("a a b b", "a b a b");
  const double f = 1.0 / 8.0;
  expect_bleu(s, {1.0, std::sqrt(1.0 / 3.0), std::cbrt(f / 3.0), std::pow(f * f / 3.0, 0.25)});
}

TEST(Bleu, LongCandidateHasNoPenalty) {
  // c = 5 > r = 3; p = 3/5, 2/4, 1/3, 0 -> 1/10.
  const auto s = bleu_of("a b c d e", "a b c");
  EXPECT_DOUBLE_EQ(s.brevity_penalty, 1.0);
  const double p1 = 0.6, p2 = 0.5, p3 = 1.0 / 3.0, p4 = 0.1;
  expect_bleu(s, {p1, std::sqrt(p1 * p2), std::cbrt(p1 * p2 * p3), std::pow(p1 * p2 * p3 * p4, 0.25)});
}

TEST(Bleu, EmptyCandidateScoresZero) {
  const auto s = bleu_of("", "a b");
  EXPECT_EQ(s.average, 0.0);
  for (double b : s.bleu) EXPECT_EQ(b, 0.0);
  EXPECT_THROW(bleu_of("a", ""), ValidationError);
}

TEST(Bleu, PrecisionsBoundedAndIdenticalInputsMonotone) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> w(0, 3), len(1, 9);
  for (int t = 0; t < 300; ++t) {
    Tokens c, r;
    for (int i = len(rng); i > 0; --i) c.push_back(std::string(1, static_cast<char>('a' + w(rng))));
    for (int i = len(rng); i > 0; --i) r.push_back(std::string(1, static_cast<char>('a' + w(rng))));
    const auto s = bleu(c, r);
    for (double p : s.precisions) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
    const auto same = bleu(c, c);
    for (std::size_t n = 1; n < same.bleu.size(); ++n) EXPECT_LE(same.bleu[n], same.bleu[n - 1] + 1e-15);
  }
}

std::vector<ContextResponsePair> distinct_pairs(std::size_t n) {
  std::vector<ContextResponsePair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    pairs.push_back({"ctx" + std::to_string(i), "resp" + std::to_string(i), "c" + std::to_string(i)});
  }
  return pairs;
}

TEST(CandidateSets, GoldOnceDistinctAndReproducible) {
  auto pairs = distinct_pairs(30);
  pairs.push_back({"again", "resp3", "dup"});
  const auto a = build_candidate_sets(pairs, 10, 7);
  const auto b = build_candidate_sets(pairs, 10, 7);
  ASSERT_EQ(a.size(), pairs.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].candidates, b[i].candidates);
    EXPECT_EQ(a[i].candidates.size(), 10u);
    EXPECT_EQ(a[i].candidates[a[i].gold_position], pairs[i].response_text);
    EXPECT_EQ(std::count(a[i].candidates.begin(), a[i].candidates.end(), pairs[i].response_text), 1);
    EXPECT_EQ(std::set<std::string>(a[i].candidates.begin(), a[i].candidates.end()).size(), 10u);
  }
  EXPECT_NE(build_candidate_sets(pairs, 10, 8)[0].candidates, a[0].candidates);
  EXPECT_THROW(build_candidate_sets(distinct_pairs(5), 6, 0), ValidationError);
}

TEST(PrecisionAt1, TiesAreMisses) {
  const auto sets = build_candidate_sets(distinct_pairs(5), 3, 1);
  const auto gold_wins = [](const CandidateSet& s) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(s.candidates.size()));
    v[static_cast<Eigen::Index>(s.gold_position)] = 1.0;
    return v;
  };
  EXPECT_DOUBLE_EQ(precision_at_1(sets, gold_wins), 1.0);
  const auto flat = [](const CandidateSet& s) { return Vector::Zero(static_cast<Eigen::Index>(s.candidates.size())).eval(); };
  EXPECT_DOUBLE_EQ(precision_at_1(sets, flat), 0.0);
}

TEST(PrecisionAt1OfN, IdenticalEncodersOnCopyCorpusScorePerfectly) {
  std::vector<std::vector<std::string>> docs{{}};
  std::vector<ContextResponsePair> pairs;
  for (int i = 0; i < 30; ++i) {
    const std::string w = "w" + std::to_string(i);
    docs[0].push_back(w);
    pairs.push_back({w, w, "c" + std::to_string(i)});
  }
  Vocabulary vocab = Vocabulary::build(docs, 1);
  EncoderConfig c;
  c.kind = EncoderKind::BagOfEmbeddings;
  c.model_dim = vocab.size();
  c.vocab_size = vocab.size();
  EncoderParams p = init_params(c);
  p.token_embedding = Matrix::Identity(c.vocab_size, c.model_dim);
  RetrievalModel model(p, p, std::move(vocab));
  EXPECT_DOUBLE_EQ(precision_at_1_of_n(model, pairs, 20, 3), 1.0);
  EXPECT_EQ(precision_at_1_of_n(model, pairs, 20, 3), precision_at_1_of_n(model, pairs, 20, 3));
}

TEST(ClassificationMetrics, AllCorrect) {
  const Tokens labels{"a", "b", "c"};
  const Tokens y{"a", "c", "c", "b"};
  const auto m = classification_metrics(y, y, labels);
  EXPECT_DOUBLE_EQ(m.micro_accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.macro_accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.macro_f1, 1.0);
}

TEST(ClassificationMetrics, TwoClassHandExample) {
  const Tokens labels{"a", "b"};
  const auto m = classification_metrics(Tokens{"a", "b", "b", "b"}, Tokens{"a", "a", "b", "b"}, labels);
  EXPECT_DOUBLE_EQ(m.micro_accuracy, 0.75);
  EXPECT_DOUBLE_EQ(m.macro_accuracy, 0.75);
  // F1_a = 2(1 * 0.5)/1.5, F1_b = 2(2/3 * 1)/(5/3)
  EXPECT_NEAR(m.macro_f1, (2.0 / 3.0 + 0.8) / 2.0, 1e-12);
}

TEST(ClassificationMetrics, AbsentClassScoresZeroF1) {
  const Tokens labels{"a", "b", "c"};
  const auto m = classification_metrics(Tokens{"a", "b"}, Tokens{"a", "b"}, labels);
  EXPECT_DOUBLE_EQ(m.macro_accuracy, 1.0);
  EXPECT_NEAR(m.macro_f1, 2.0 / 3.0, 1e-12);
}

TEST(ClassificationMetrics, Errors) {
  const Tokens labels{"a", "b"};
  EXPECT_THROW(classification_metrics(Tokens{"z"}, Tokens{"a"}, labels), ValidationError);
  EXPECT_THROW(classification_metrics(Tokens{}, Tokens{}, labels), ValidationError);
  EXPECT_THROW(classification_metrics(Tokens{"a"}, Tokens{"a", "b"}, labels), ValidationError);
}

TEST(ClassificationMetrics, MatchesConfusionMatrixOnAllShortSequences) {
  const Tokens labels{"x", "y", "z"};
  for (std::size_t len = 1; len <= 4; ++len) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < len; ++i) total *= 3;
    Tokens g(len), p(len);
    for (std::size_t gi = 0; gi < total; ++gi) {
      for (std::size_t k = 0, v = gi; k < len; ++k, v /= 3) g[k] = labels[v % 3];
      for (std::size_t pi = 0; pi < total; ++pi) {
        for (std::size_t k = 0, v = pi; k < len; ++k, v /= 3) p[k] = labels[v % 3];
        const auto m = classification_metrics(p, g, labels);
        const auto o = oracle::confusion_metrics(p, g, labels);
        ASSERT_NEAR(m.micro_accuracy, o.micro_accuracy, 1e-12);
        ASSERT_NEAR(m.macro_accuracy, o.macro_accuracy, 1e-12);
        ASSERT_NEAR(m.macro_f1, o.macro_f1, 1e-12);
      }
    }
  }
}

TEST(MetricReport, JsonAndText) {
  MetricReport r;
  r.mean_bleu = bleu_of("a b c", "a b c d e f");
  r.bleu_samples = 1;
  r.p_at_1 = 0.25;
  r.p_at_1_n = 100;
  r.p_at_1_samples = 4;
  r.classification = ClassificationMetrics{0.5, 0.4, 0.3};
  r.classification_samples = 10;
  const auto j = r.to_json();
  EXPECT_DOUBLE_EQ(j.at("p_at_1").at("value").get<double>(), 0.25);
  EXPECT_EQ(j.at("p_at_1").at("n").get<int>(), 100);
  EXPECT_DOUBLE_EQ(j.at("classification").at("macro_f1").get<double>(), 0.3);
  EXPECT_NEAR(j.at("bleu").at("bleu_1").get<double>(), std::exp(-1.0), 1e-12);
  EXPECT_NE(r.to_text().find("P@1,100"), std::string::npos);
}

}  // namespace
}  // namespace emojichat
