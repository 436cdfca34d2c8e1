#include "emojichat/presets.hpp"

#include "emojichat/error.hpp"

namespace emojichat {

RetrieverPreset retriever_preset(std::string_view name) {
  RetrieverPreset p;
  p.name = std::string(name);
  if (name == "bert") {
    p.encoder = {.kind = EncoderKind::Transformer, .model_dim = 300, .layers = 2, .heads = 4,
                 .feedforward_dim = 600};
    p.train = {.epochs = 12, .batch_size = 16, .learning_rate = 5e-5, .optimizer = OptimizerKind::Adamax};
  } else if (name == "vanilla") {
    p.encoder = {.kind = EncoderKind::Transformer, .model_dim = 64, .layers = 2, .heads = 2,
                 .feedforward_dim = 128};
    p.train = {.epochs = 25, .batch_size = 128, .learning_rate = 8e-4, .optimizer = OptimizerKind::Adamax};
  } else if (name == "tiny") {
    p.encoder = {.kind = EncoderKind::Transformer, .model_dim = 32, .layers = 1, .heads = 2,
                 .feedforward_dim = 64};
    p.train = {.epochs = 30, .batch_size = 32, .learning_rate = 5e-3, .optimizer = OptimizerKind::Adamax};
  } else if (name == "bag") {
    p.encoder = {.kind = EncoderKind::BagOfEmbeddings, .model_dim = 64};
    p.train = {.epochs = 20, .batch_size = 32, .learning_rate = 1e-2, .optimizer = OptimizerKind::Adamax};
  } else {
    throw ValidationError("unknown retriever preset \"" + std::string(name) + "\"");
  }
  return p;
}

std::vector<std::string> retriever_preset_names() { return {"bert", "vanilla", "tiny", "bag"}; }

CnnConfig classifier_recipe() { return CnnConfig{}; }

}  // namespace emojichat
