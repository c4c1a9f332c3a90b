#include "gwrl/autodiff/checkpoint.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gwrl::ad {

namespace {

template <typename T>
void PutLe(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw std::runtime_error("checkpoint truncated at byte " +
                               std::to_string(pos_));
    }
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(raw, raw + sizeof(T));
    }
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  std::string GetString(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("checkpoint truncated");
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string SerializeParams(const ParamStore& store) {
  std::string out;
  PutLe<std::uint32_t>(out, kCheckpointVersion);
  PutLe<std::uint64_t>(out, store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::string& name = store.name(i);
    const Tensor& value = store.value(i);
    PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(value.rank()));
    for (std::size_t extent : value.shape()) PutLe<std::uint64_t>(out, extent);
    for (double v : value.values()) PutLe<double>(out, v);
  }
  return out;
}

ParamStore DeserializeParams(const std::string& bytes, std::uint64_t seed) {
  Reader in(bytes);
  const auto version = in.Get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }
  const auto count = in.Get<std::uint64_t>();
  ParamStore store(seed);
  for (std::uint64_t p = 0; p < count; ++p) {
    const auto name_len = in.Get<std::uint32_t>();
    std::string name = in.GetString(name_len);
    const auto rank = in.Get<std::uint32_t>();
    Shape shape(rank);
    for (auto& extent : shape) extent = in.Get<std::uint64_t>();
    std::vector<double> values(NumElements(shape));
    for (double& v : values) v = in.Get<double>();
    store.Add(name, Tensor(std::move(shape), std::move(values)));
  }
  if (!in.AtEnd()) throw std::runtime_error("trailing bytes after checkpoint");
  return store;
}

void SaveCheckpoint(const ParamStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::string bytes = SerializeParams(store);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ParamStore LoadCheckpoint(const std::filesystem::path& path, std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing checkpoint: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return DeserializeParams(buf.str(), seed);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void AssignParams(ParamStore& dst, const ParamStore& src) {
  if (dst.size() != src.size()) {
    throw std::invalid_argument("parameter count mismatch: " +
                                std::to_string(dst.size()) + " vs " +
                                std::to_string(src.size()));
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst.Set(src.name(i), src.value(i));
  }
}

}  // namespace gwrl::ad
