#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "emojichat/emotion.hpp"
#include "emojichat/encoder.hpp"
#include "emojichat/retrieval.hpp"

namespace emojichat {

// Encoder architecture plus optimizer schedule for the response retriever.
//   bert     12 epochs, batch 16, lr 5e-5, Adamax, 300-wide encoder
//   vanilla  25 epochs, batch 128, lr 8e-4, Adamax
//   tiny     small transformer that trains in seconds on synthetic data
//   bag      bag-of-embeddings baseline
struct RetrieverPreset {
  std::string name;
  EncoderConfig encoder;  // vocab_size filled in at training time
  TrainConfig train;
};

RetrieverPreset retriever_preset(std::string_view name);  // throws ValidationError
std::vector<std::string> retriever_preset_names();

// Adam lr 0.001, decay 1e-6, two epochs, batch 128, widths {2,3,4} x 32.
CnnConfig classifier_recipe();

}  // namespace emojichat
