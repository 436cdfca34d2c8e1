#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "emojichat/tensor.hpp"

namespace emojichat {

enum class OptimizerKind { Adam, Adamax };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(std::string_view s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adamax;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Time-based decay: lr_t = lr / (1 + decay * t), t = steps taken so far.
  double decay = 0.0;
};

struct ParamGrad {
  Matrix* param;
  const Matrix* grad;
};

// First-order optimizer state. The list passed to step() must keep the same
// order and shapes from call to call.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config) : config_(config) {}

  void step(std::span<const ParamGrad> params);

  double current_learning_rate() const;
  std::size_t steps() const { return steps_; }
  const OptimizerConfig& config() const { return config_; }

 private:
  OptimizerConfig config_;
  std::size_t steps_ = 0;
  std::vector<Matrix> first_moment_;
  std::vector<Matrix> second_moment_;  // infinity norm for Adamax
};

}  // namespace emojichat
