#include "emojichat/tensor.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "emojichat/error.hpp"

namespace emojichat {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr char kMagic[4] = {'E', 'M', 'C', 'K'};

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes, std::size_t limit) : bytes_(bytes), limit_(limit) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void read_doubles(double* dst, std::size_t n) {
    if (n > (limit_ - pos_) / sizeof(double)) throw ParseError(0, "checkpoint truncated");
    std::memcpy(dst, bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }

  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) {
    if (n > limit_ - pos_) throw ParseError(0, "checkpoint truncated");
  }

  const std::string& bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

bool all_finite(const Matrix& m) { return m.allFinite(); }

void Checkpoint::add(std::string name, Matrix value) {
  for (const auto& [n, v] : tensors_) {
    if (n == name) throw ValidationError("duplicate tensor \"" + name + "\" in checkpoint");
  }
  if (!all_finite(value)) throw ValidationError("tensor \"" + name + "\" has non-finite values");
  tensors_.emplace_back(std::move(name), std::move(value));
}

const Matrix& Checkpoint::get(const std::string& name) const {
  for (const auto& [n, v] : tensors_) {
    if (n == name) return v;
  }
  throw ParseError(0, "checkpoint has no tensor '" + name + "'");
}

bool Checkpoint::contains(const std::string& name) const {
  for (const auto& [n, v] : tensors_) {
    if (n == name) return true;
  }
  return false;
}

std::string Checkpoint::serialize() const {
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  const std::string head = header.dump();
  put<std::uint64_t>(out, head.size());
  out += head;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors_.size()));
  for (const auto& [name, m] : tensors_) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    out.append(reinterpret_cast<const char*>(m.data()), static_cast<std::size_t>(m.size()) * sizeof(double));
  }
  put<std::uint32_t>(out, crc_of(out.data(), out.size()));
  return out;
}

Checkpoint Checkpoint::deserialize(const std::string& bytes) {
  if (bytes.size() < 4 + 4 + 8 + 4 + 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError(0, "not a checkpoint file");
  }
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body, 4);
  if (stored != crc_of(bytes.data(), body)) throw ParseError(0, "checkpoint checksum mismatch");

  Reader r(bytes, body);
  r.take(4);
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw ParseError(0, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const auto head_len = r.get<std::uint64_t>();
  try {
    ckpt.header = nlohmann::json::parse(r.take(head_len));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("checkpoint header: ") + e.what());
  }
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint32_t>();
    std::string name = r.take(name_len);
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (rows > (1ull << 31) || cols > (1ull << 31)) throw ParseError(0, "tensor '" + name + "' too large");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    r.read_doubles(m.data(), static_cast<std::size_t>(rows * cols));
    ckpt.tensors_.emplace_back(std::move(name), std::move(m));
  }
  if (r.pos() != body) throw ParseError(0, "trailing bytes in checkpoint");
  return ckpt;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  const std::string bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize(bytes);
  } catch (const ParseError& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

}  // namespace emojichat
