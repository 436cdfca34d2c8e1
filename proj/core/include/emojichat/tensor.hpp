#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace emojichat {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// Non-owning handle used to walk a parameter set by name.
struct TensorRef {
  std::string name;
  Matrix* value;
};

struct ConstTensorRef {
  std::string name;
  const Matrix* value;
};

bool all_finite(const Matrix& m);

// Versioned binary tensor container:
//   "EMCK" | u32 version | u64 header_len | header JSON |
//   u32 count | count x (u32 name_len | name | u64 rows | u64 cols | f64[rows*cols]) |
//   u32 crc32 of all preceding bytes
// All integers and floats little-endian; matrices row-major.
class Checkpoint {
 public:
  static constexpr std::uint32_t kVersion = 1;

  nlohmann::json header = nlohmann::json::object();

  void add(std::string name, Matrix value);  // throws ValidationError on duplicates or NaN/Inf
  const Matrix& get(const std::string& name) const;  // throws ParseError when missing
  bool contains(const std::string& name) const;
  const std::vector<std::pair<std::string, Matrix>>& tensors() const { return tensors_; }

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& bytes);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, Matrix>> tensors_;
};

}  // namespace emojichat
