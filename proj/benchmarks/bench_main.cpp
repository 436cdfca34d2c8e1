#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "emojichat/emotion.hpp"
#include "emojichat/encoder.hpp"
#include "emojichat/eval.hpp"
#include "emojichat/presets.hpp"
#include "emojichat/retrieval.hpp"

namespace emojichat {
namespace {

TokenSequence random_sequence(std::size_t vocab, std::size_t len, std::size_t max_len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<TokenId> id(static_cast<TokenId>(kReservedTokens), static_cast<TokenId>(vocab - 1));
  TokenSequence s;
  s.true_length = len;
  s.ids.assign(max_len, kPadId);
  for (std::size_t i = 0; i < len; ++i) s.ids[i] = id(rng);
  return s;
}

void BM_Encode(benchmark::State& state, const char* preset_name) {
  auto preset = retriever_preset(preset_name);
  preset.encoder.vocab_size = 2000;
  const EncoderParams p = init_params(preset.encoder);
  const auto seq = random_sequence(2000, static_cast<std::size_t>(state.range(0)), preset.encoder.max_len, 1);
  for (auto _ : state) benchmark::DoNotOptimize(encode(p, seq));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK_CAPTURE(BM_Encode, tiny, "tiny")->Arg(16)->Arg(64);
BENCHMARK_CAPTURE(BM_Encode, vanilla, "vanilla")->Arg(16)->Arg(64);
BENCHMARK_CAPTURE(BM_Encode, bag, "bag")->Arg(64);

void BM_EncodeBackward(benchmark::State& state) {
  auto preset = retriever_preset("tiny");
  preset.encoder.vocab_size = 2000;
  const EncoderParams p = init_params(preset.encoder);
  const std::vector<TokenSequence> seqs{random_sequence(2000, 32, preset.encoder.max_len, 2)};
  const std::vector<Vector> up{Vector::Ones(static_cast<Eigen::Index>(preset.encoder.model_dim))};
  for (auto _ : state) benchmark::DoNotOptimize(encoder_grad(p, seqs, up));
}
BENCHMARK(BM_EncodeBackward);

void BM_CnnForward(benchmark::State& state) {
  CnnConfig c = classifier_recipe();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const Matrix embedding = Matrix::NullaryExpr(2000, 300, [&] { return g(rng); });
  const CnnParams p = init_cnn(c, embedding);
  const auto seq = random_sequence(2000, static_cast<std::size_t>(state.range(0)), c.max_len, 4);
  for (auto _ : state) benchmark::DoNotOptimize(cnn_forward(p, seq));
}
BENCHMARK(BM_CnnForward)->Arg(16)->Arg(64);

void BM_Bleu(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> w(0, 50);
  std::vector<std::string> cand, ref;
  for (int i = 0; i < state.range(0); ++i) {
    cand.push_back("w" + std::to_string(w(rng)));
    ref.push_back("w" + std::to_string(w(rng)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(bleu(cand, ref));
}
BENCHMARK(BM_Bleu)->Arg(12)->Arg(48);

void BM_RetrievePool(benchmark::State& state) {
  auto preset = retriever_preset("tiny");
  std::vector<std::vector<std::string>> docs(1);
  for (int i = 0; i < 300; ++i) docs[0].push_back("w" + std::to_string(i));
  Vocabulary vocab = Vocabulary::build(docs, 1);
  preset.encoder.vocab_size = vocab.size();
  const EncoderParams p = init_params(preset.encoder);
  RetrievalModel model(p, p, std::move(vocab));
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> w(0, 299);
  std::vector<std::string> texts;
  for (int i = 0; i < state.range(0); ++i) {
    std::string t;
    for (int k = 0; k < 8; ++k) t += "w" + std::to_string(w(rng)) + " ";
    texts.push_back(t + std::to_string(i));
  }
  model.set_candidates(texts);
  for (auto _ : state) benchmark::DoNotOptimize(retrieve(model, "w1 w2 w3 w4", 1));
}
BENCHMARK(BM_RetrievePool)->Arg(1000)->Arg(10000);

}  // namespace
}  // namespace emojichat

BENCHMARK_MAIN();
