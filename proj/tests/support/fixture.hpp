#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "emojichat/config.hpp"
#include "emojichat/service.hpp"

namespace emojichat::testing {

// A tiny fully deterministic pipeline. Retrieval is a bag-of-words model with
// one-hot embeddings, so a context equal to a pool response retrieves it. The
// classifier reads axis 0 ("happy") or axis 1 ("sad") of 4-d word vectors.
struct FixtureData {
  std::vector<ContextResponsePair> pairs;
  std::vector<std::string> labels{"happy", "sad"};
};

FixtureData fixture_data();
PipelineArtifacts fixture_artifacts(double threshold = 0.3);

// Writes bundle, classifier, word vectors and emoji map under dir and returns
// a config pointing at them.
AppConfig write_fixture(const std::filesystem::path& dir, double threshold = 0.3);

}  // namespace emojichat::testing
