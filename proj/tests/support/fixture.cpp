#include "fixture.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "emojichat/bundle.hpp"
#include "emojichat/text.hpp"

namespace emojichat::testing {
namespace {

const std::map<std::string, std::vector<double>>& word_vectors() {
  static const std::map<std::string, std::vector<double>> v{
      {"sunny", {1, 0, 0.2, 0}},   {"bright", {0.9, 0, 0, 0.3}}, {"smile", {0.8, 0.1, 0.1, 0}},
      {"gloomy", {0, 1, 0.2, 0}},  {"rainy", {0.1, 0.9, 0, 0.2}}, {"tears", {0, 0.8, 0, 0.1}},
      {"day", {0.1, 0.1, 1, 0}},   {"night", {0.1, 0.1, 0, 1}},   {"today", {0.05, 0.05, 0.5, 0.5}},
  };
  return v;
}

WordVectorTable fixture_table() {
  WordVectorTable t;
  for (const auto& [w, xs] : word_vectors()) t.insert(w, Eigen::Map<const Vector>(xs.data(), 4));
  return t;
}

const char* kEmojiMap = R"({
  "happy": [{"emoji": "😀", "keywords": ["sunny"]}, {"emoji": "🌞", "keywords": ["bright", "day"]}],
  "sad": [{"emoji": "😢", "keywords": ["tears"]}, {"emoji": "🌧️", "keywords": ["rainy", "gloomy"]}]
})";

RetrievalModel fixture_retrieval(const FixtureData& data) {
  Vocabulary vocab = build_retrieval_vocabulary(data.pairs, 1);
  EncoderConfig c;
  c.kind = EncoderKind::BagOfEmbeddings;
  c.vocab_size = vocab.size();
  c.model_dim = vocab.size();
  EncoderParams p = init_params(c);
  p.token_embedding = Matrix::Identity(c.vocab_size, c.model_dim);
  RetrievalModel model(p, p, std::move(vocab));
  std::vector<std::string> responses;
  for (const auto& pair : data.pairs) responses.push_back(pair.response_text);
  model.set_candidates(responses);
  return model;
}

EmotionClassifier fixture_classifier(const FixtureData& data, const WordVectorTable& table) {
  std::vector<std::vector<std::string>> docs;
  for (const auto& pair : data.pairs) docs.push_back(tokenize(pair.response_text));
  Vocabulary vocab = Vocabulary::build(docs, 1);
  CnnConfig c;
  c.filter_widths = {1};
  c.filters_per_width = 2;
  c.num_classes = 2;
  c.embedding_dim = 4;
  CnnParams p = init_cnn(c, embedding_from_table(vocab, table));
  p.kernels[0].setZero();
  p.kernels[0](0, 0) = 1.0;
  p.kernels[0](1, 1) = 1.0;
  p.biases[0].setZero();
  p.output = 4.0 * Matrix::Identity(2, 2);
  p.output_bias.setZero();
  return EmotionClassifier(std::move(p), std::move(vocab), data.labels);
}

}  // namespace

FixtureData fixture_data() {
  FixtureData s;
  s.pairs = {
      {"what a sunny bright day", "sunny bright day today", "f1"},
      {"why the tears", "gloomy rainy night", "f2"},
      {"say something nice", "smile today", "f3"},
      {"i cried all night", "tears tonight", "f4"},
      {"any plans", "nothing planned", "f5"},
  };
  return s;
}

PipelineArtifacts fixture_artifacts(double threshold) {
  const FixtureData data = fixture_data();
  PipelineArtifacts a;
  a.word_vectors = fixture_table();
  a.retrieval = fixture_retrieval(data);
  a.bundle_version = "fixture";
  a.classifier = fixture_classifier(data, a.word_vectors);
  std::istringstream map_in(kEmojiMap);
  a.emoji_map = load_emoji_map(map_in, a.word_vectors, data.labels);
  a.remove_principal = false;
  a.threshold = threshold;
  return a;
}

AppConfig write_fixture(const std::filesystem::path& dir, double threshold) {
  const FixtureData data = fixture_data();
  const PipelineArtifacts a = fixture_artifacts(threshold);
  AppConfig cfg;
  cfg.bundle = dir / "bundle";
  cfg.classifier = dir / "classifier";
  cfg.word_vectors = dir / "vectors.txt";
  cfg.emoji_map = dir / "emoji_map.json";
  cfg.sessions_dir = dir / "sessions";
  cfg.threshold = threshold;
  cfg.sif_remove_principal = false;
  save_retrieval_bundle(cfg.bundle, a.retrieval);
  save_classifier(cfg.classifier, a.classifier);
  {
    std::ofstream out(cfg.word_vectors);
    out << word_vectors().size() << " 4\n";
    for (const auto& [w, xs] : word_vectors()) {
      out << w;
      for (double x : xs) out << ' ' << x;
      out << '\n';
    }
  }
  std::ofstream(cfg.emoji_map) << kEmojiMap;
  return cfg;
}

}  // namespace emojichat::testing
