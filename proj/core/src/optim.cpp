#include "emojichat/optim.hpp"

#include <cmath>
#include <string>

#include "emojichat/error.hpp"

namespace emojichat {

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::Adam ? "adam" : "adamax";
}

OptimizerKind optimizer_from_string(std::string_view s) {
  if (s == "adam") return OptimizerKind::Adam;
  if (s == "adamax") return OptimizerKind::Adamax;
  throw ValidationError("unknown optimizer \"" + std::string(s) + "\"");
}

double Optimizer::current_learning_rate() const {
  return config_.learning_rate / (1.0 + config_.decay * static_cast<double>(steps_));
}

void Optimizer::step(std::span<const ParamGrad> params) {
  if (first_moment_.empty()) {
    for (const auto& pg : params) {
      first_moment_.push_back(Matrix::Zero(pg.param->rows(), pg.param->cols()));
      second_moment_.push_back(Matrix::Zero(pg.param->rows(), pg.param->cols()));
    }
  }
  if (first_moment_.size() != params.size()) {
    throw ValidationError("optimizer parameter list changed between steps");
  }
  const double lr = current_learning_rate();
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double bias1 = 1.0 - std::pow(b1, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i].param;
    const Matrix& g = *params[i].grad;
    Matrix& m = first_moment_[i];
    Matrix& v = second_moment_[i];
    m = b1 * m + (1.0 - b1) * g;
    if (config_.kind == OptimizerKind::Adamax) {
      v = (b2 * v).cwiseMax(g.cwiseAbs());
      p.array() -= (lr / bias1) * m.array() / (v.array() + config_.epsilon);
    } else {
      v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
      const double bias2 = 1.0 - std::pow(b2, t);
      p.array() -= lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + config_.epsilon);
    }
  }
}

}  // namespace emojichat
