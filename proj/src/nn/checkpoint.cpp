#include "xdrive/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace xdrive::nn {
namespace {

template <typename T>
void put_le(std::vector<char>& out, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::vector<char>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  std::string get_string(std::size_t n) {
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("checkpoint truncated");
  }

  const std::vector<char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const TensorBuf<float>* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

std::vector<char> encode_checkpoint(const Checkpoint& ckpt) {
  std::vector<char> out(std::begin(Checkpoint::kMagic), std::end(Checkpoint::kMagic));
  put_le<std::uint32_t>(out, Checkpoint::kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    if (!t.consistent()) throw ShapeMismatch("tensor '" + name + "' data does not match its shape");
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put_le<std::int64_t>(out, d);
    for (float v : t.data) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<char>& bytes) {
  Reader r(bytes);
  if (r.get_string(4) != std::string(Checkpoint::kMagic, 4)) throw FormatError("not a checkpoint (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != Checkpoint::kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();
  Checkpoint ckpt;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name = r.get_string(r.get<std::uint32_t>());
    TensorBuf<float> t;
    const auto ndim = r.get<std::uint32_t>();
    if (ndim > 8) throw FormatError("tensor '" + name + "' has implausible rank");
    for (std::uint32_t d = 0; d < ndim; ++d) {
      const auto dim = r.get<std::int64_t>();
      if (dim < 0) throw FormatError("tensor '" + name + "' has a negative dimension");
      t.shape.push_back(dim);
    }
    const auto n = t.numel();
    if (n > static_cast<std::int64_t>(bytes.size())) throw FormatError("checkpoint truncated");
    t.data.resize(static_cast<std::size_t>(n));
    for (auto& v : t.data) v = std::bit_cast<float>(r.get<std::uint32_t>());
    ckpt.tensors.emplace_back(name, std::move(t));
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint");
  return ckpt;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace xdrive::nn
