#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "xdrive/nn/tensor.hpp"

namespace xdrive::nn {

// Flat binary checkpoint, all integers and scalars little-endian:
//
//   magic   4 bytes  "XDCK"
//   version u32      (currently 1)
//   count   u32      number of tensors
//   count x { name_len u32, name bytes, ndim u32, dims i64[ndim], data f32[prod(dims)] }
struct Checkpoint {
  static constexpr char kMagic[4] = {'X', 'D', 'C', 'K'};
  static constexpr std::uint32_t kVersion = 1;

  std::vector<std::pair<std::string, TensorBuf<float>>> tensors;

  const TensorBuf<float>* find(const std::string& name) const;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

std::vector<char> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<char>& bytes);

template <typename Scalar>
Checkpoint to_checkpoint(const ParamList<Scalar>& params) {
  Checkpoint ckpt;
  for (const auto& p : params) {
    TensorBuf<float> t;
    t.shape = {p.rows, p.cols};
    t.data.resize(static_cast<std::size_t>(p.size()));
    for (Index i = 0; i < p.size(); ++i) t.data[static_cast<std::size_t>(i)] = static_cast<float>(p.data[i]);
    ckpt.tensors.emplace_back(p.name, std::move(t));
  }
  return ckpt;
}

// Copies every named tensor into the matching parameter. Missing names or
// shape disagreements raise FormatError.
template <typename Scalar>
void from_checkpoint(const Checkpoint& ckpt, const ParamList<Scalar>& params) {
  for (const auto& p : params) {
    const auto* t = ckpt.find(p.name);
    if (!t) throw FormatError("checkpoint has no tensor '" + p.name + "'");
    if (t->shape.size() != 2 || t->shape[0] != p.rows || t->shape[1] != p.cols)
      throw ShapeMismatch("checkpoint tensor '" + p.name + "' has the wrong shape");
    for (Index i = 0; i < p.size(); ++i) p.data[i] = static_cast<Scalar>(t->data[static_cast<std::size_t>(i)]);
  }
}

template <typename Scalar>
void save_parameters(const std::filesystem::path& path, const ParamList<Scalar>& params) {
  write_checkpoint(path, to_checkpoint(params));
}

template <typename Scalar>
void load_parameters(const std::filesystem::path& path, const ParamList<Scalar>& params) {
  from_checkpoint(read_checkpoint(path), params);
}

}  // namespace xdrive::nn
