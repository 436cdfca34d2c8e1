#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "emojichat/emotion.hpp"
#include "emojichat/error.hpp"
#include "emojichat/retrieval.hpp"
#include "gradcheck.hpp"
#include "oracle.hpp"
#include "synthetic.hpp"

namespace emojichat {
namespace {

CnnConfig small_cnn() {
  CnnConfig c;
  c.filter_widths = {1, 2, 3};
  c.filters_per_width = 3;
  c.num_classes = 4;
  c.max_len = 12;
  c.seed = 5;
  return c;
}

Matrix random_embedding(std::size_t vocab, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix e = Matrix::NullaryExpr(static_cast<Eigen::Index>(vocab), static_cast<Eigen::Index>(dim), [&] { return g(rng); });
  e.row(kPadId).setZero();
  return e;
}

CnnParams random_cnn(std::uint64_t seed) {
  CnnParams p = init_cnn(small_cnn(), random_embedding(10, 5, seed));
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (auto& b : p.biases) b = Matrix::NullaryExpr(b.rows(), b.cols(), [&] { return u(rng); });
  p.output_bias = Matrix::NullaryExpr(1, p.output_bias.cols(), [&] { return u(rng); });
  return p;
}

TokenSequence sequence(std::vector<TokenId> ids, std::size_t max_len) {
  TokenSequence s;
  s.true_length = ids.size();
  s.ids = std::move(ids);
  s.ids.resize(max_len, kPadId);
  return s;
}

TokenSequence random_sequence(std::mt19937_64& rng, std::size_t len) {
  std::uniform_int_distribution<TokenId> id(3, 9);
  std::vector<TokenId> ids(len);
  for (auto& x : ids) x = id(rng);
  return sequence(ids, 12);
}

TEST(CnnForward, ZeroWeightsGiveUniformSoftmax) {
  CnnParams p = random_cnn(1);
  for (auto& k : p.kernels) k.setZero();
  for (auto& b : p.biases) b.setZero();
  p.output.setZero();
  p.output_bias.setZero();
  std::mt19937_64 rng(1);
  const Vector logits = cnn_forward(p, random_sequence(rng, 5));
  EXPECT_EQ(logits, Vector::Zero(4));
  const Vector probs = softmax(logits);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(probs[i], 0.25);
}

TEST(CnnForward, SingleWidthOneFilterByHand) {
  CnnConfig c;
  c.filter_widths = {1};
  c.filters_per_width = 1;
  c.num_classes = 2;
  c.max_len = 4;
  Matrix emb = Matrix::Zero(4, 2);
  emb.row(3) << 2.0, -1.0;
  CnnParams p = init_cnn(c, emb);
  p.kernels[0] << 0.5, 1.5;  // 2*0.5 - 1*1.5 = -0.5
  p.biases[0] << 1.25;        // pre-activation 0.75
  p.output << 2.0, -4.0;
  p.output_bias << 0.1, 0.2;
  const Vector logits = cnn_forward(p, sequence({3}, 4));
  EXPECT_DOUBLE_EQ(logits[0], 0.75 * 2.0 + 0.1);
  EXPECT_DOUBLE_EQ(logits[1], 0.75 * -4.0 + 0.2);
}

TEST(CnnForward, MatchesLoopOracle) {
  const CnnParams p = random_cnn(3);
  std::mt19937_64 rng(4);
  for (std::size_t len = 3; len <= 12; ++len) {
    const auto seq = random_sequence(rng, len);
    const Vector logits = cnn_forward(p, seq);
    const auto ref = oracle::cnn_logits(p, seq.tokens());
    for (std::size_t c = 0; c < ref.size(); ++c) EXPECT_NEAR(logits[static_cast<Eigen::Index>(c)], ref[c], 1e-10);
  }
}

TEST(CnnForward, PaddingIsIgnored) {
  const CnnParams p = random_cnn(6);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    auto seq = random_sequence(rng, 4);
    const Vector logits = cnn_forward(p, seq);
    for (std::size_t i = seq.true_length; i < seq.ids.size(); ++i) seq.ids[i] = 7;
    EXPECT_EQ(cnn_forward(p, seq), logits);
  }
}

TEST(CnnForward, RejectsShortSequences) {
  const CnnParams p = random_cnn(2);
  EXPECT_THROW(cnn_forward(p, sequence({4, 5}, 12)), ValidationError);
}

TEST(CnnGrad, FiniteDifferencesEveryGroup) {
  CnnParams p = random_cnn(8);
  std::mt19937_64 rng(9);
  std::vector<TokenSequence> seqs;
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < 6; ++i) {
    seqs.push_back(random_sequence(rng, 3 + i));
    labels.push_back(i % 4);
  }
  CnnParams g = cnn_grad(p, seqs, labels);
  const auto errors = testing::finite_difference_check(p.tensors(), std::as_const(g).tensors(),
                                                       [&] { return cnn_loss(p, seqs, labels); });
  ASSERT_EQ(errors.size(), 2 * 3 + 2u);
  for (const auto& e : errors) {
    EXPECT_LT(e.relative_error, 1e-4) << e.name;
    EXPECT_GT(e.analytic_norm, 0.0) << e.name;
  }
}

struct MarkerSetup {
  testing::MarkerDataset data;
  WordVectorTable table;
};

MarkerSetup marker_setup(std::size_t classes, std::size_t train, std::uint64_t seed) {
  MarkerSetup s{testing::marker_dataset(classes, train, 200, seed), {}};
  std::vector<std::string> words = s.data.markers;
  words.insert(words.end(), s.data.fillers.begin(), s.data.fillers.end());
  s.table = testing::random_word_table(words, 50, seed + 100);
  return s;
}

TEST(TrainClassifier, TwoMarkerClassesReachHighTrainingAccuracy) {
  const auto s = marker_setup(2, 3000, 1);
  CnnConfig c;
  c.num_classes = 2;
  c.seed = 3;
  const auto r = train_classifier(s.data.train, s.data.labels, s.table, c);
  EXPECT_EQ(r.epoch_losses.size(), 2u);
  std::size_t correct = 0;
  for (const auto& ex : s.data.train) correct += r.classifier.predict(ex.text).label == ex.label;
  EXPECT_GE(static_cast<double>(correct) / static_cast<double>(s.data.train.size()), 0.99);
  for (const auto& ex : s.data.test) {
    if (ex.text.find("marker1") != std::string::npos) {
      EXPECT_EQ(r.classifier.predict(ex.text).label, "class1");
      break;
    }
  }
}

TEST(TrainClassifier, FirstEpochLossTraceIsFinite) {
  const auto s = marker_setup(3, 400, 2);
  CnnConfig c;
  c.num_classes = 3;
  const auto r = train_classifier(s.data.train, s.data.labels, s.table, c);
  const std::size_t steps_per_epoch = r.step_losses.size() / 2;
  ASSERT_GT(steps_per_epoch, 0u);
  for (std::size_t i = 0; i < steps_per_epoch; ++i) EXPECT_TRUE(std::isfinite(r.step_losses[i]));
}

TEST(TrainClassifier, ZeroLearningRateLeavesParameters) {
  const auto s = marker_setup(3, 300, 3);
  CnnConfig c;
  c.num_classes = 3;
  c.learning_rate = 0.0;
  const auto r = train_classifier(s.data.train, s.data.labels, s.table, c);
  const CnnParams fresh = init_cnn(c, r.classifier.params().embedding);
  const auto a = r.classifier.params().tensors();
  const auto b = fresh.tensors();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(*a[i].value, *b[i].value) << a[i].name;
}

TEST(TrainClassifier, DeterministicPerSeed) {
  const auto s = marker_setup(3, 300, 4);
  CnnConfig c;
  c.num_classes = 3;
  const auto a = train_classifier(s.data.train, s.data.labels, s.table, c);
  const auto b = train_classifier(s.data.train, s.data.labels, s.table, c);
  EXPECT_EQ(a.step_losses, b.step_losses);
  EXPECT_EQ(a.classifier.params().output, b.classifier.params().output);
}

TEST(TrainClassifier, RejectsUnknownLabelsAndTinyData) {
  auto s = marker_setup(2, 300, 5);
  CnnConfig c;
  c.num_classes = 2;
  s.data.train.back().label = "nope";
  EXPECT_THROW(train_classifier(s.data.train, s.data.labels, s.table, c), ValidationError);
  s.data.train.pop_back();
  s.data.train.resize(100);
  EXPECT_THROW(train_classifier(s.data.train, s.data.labels, s.table, c), ValidationError);
}

TEST(Predict, UniformLogitsPickFirstLabel) {
  std::vector<std::vector<std::string>> docs{{"a", "b"}};
  Vocabulary vocab = Vocabulary::build(docs, 1);
  CnnConfig c = small_cnn();
  CnnParams p = init_cnn(c, Matrix::Zero(static_cast<Eigen::Index>(vocab.size()), 3));
  EmotionClassifier clf(std::move(p), std::move(vocab), {"w", "x", "y", "z"});
  const auto pred = clf.predict("a b a");
  EXPECT_EQ(pred.index, 0u);
  EXPECT_EQ(pred.label, "w");
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(pred.probabilities[i], 0.25);
}

TEST(Predict, ShortTextIsPaddedAndProbabilitiesSumToOne) {
  std::vector<std::vector<std::string>> docs{{"a", "b", "c", "d", "e", "f", "g"}};
  Vocabulary vocab = Vocabulary::build(docs, 1);
  CnnParams p = init_cnn(small_cnn(), random_embedding(vocab.size(), 5, 1));
  EmotionClassifier clf(std::move(p), std::move(vocab), {"w", "x", "y", "z"});
  for (const char* text : {"", "a", "b c", "zzz", "a b c d e f g a b c d e f g"}) {
    const auto pred = clf.predict(text);
    EXPECT_NEAR(pred.probabilities.sum(), 1.0, 1e-9) << text;
  }
  EXPECT_THROW(clf.label_index("nope"), ValidationError);
}

TEST(EmbeddingFromTable, ReservedAndMissingRowsAreZero) {
  std::vector<std::vector<std::string>> docs{{"known", "unknown", "</s>"}};
  const Vocabulary vocab = Vocabulary::build(docs, 1);
  WordVectorTable t;
  Vector v(2);
  v << 1.5, -2.0;
  t.insert("known", v);
  const Matrix e = embedding_from_table(vocab, t);
  EXPECT_EQ(e.row(vocab.id("known")), v.transpose());
  EXPECT_EQ(e.row(vocab.id("unknown")).norm(), 0.0);
  EXPECT_EQ(e.row(kPadId).norm(), 0.0);
  EXPECT_EQ(e.row(kUnkId).norm(), 0.0);
  EXPECT_EQ(e.row(kSepId).norm(), 0.0);
}

TEST(CnnConfig, Validation) {
  CnnConfig c;
  c.num_classes = 1;
  EXPECT_THROW(c.validate(), ValidationError);
  c = CnnConfig{};
  c.filter_widths = {0, 2};
  EXPECT_THROW(c.validate(), ValidationError);
  c = CnnConfig{};
  EXPECT_EQ(CnnConfig::from_json(c.to_json()).to_json(), c.to_json());
}

}  // namespace
}  // namespace emojichat
