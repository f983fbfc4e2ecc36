// Copyright 2026 The spanparse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPANPARSE_CHECKPOINT_HPP_
#define SPANPARSE_CHECKPOINT_HPP_

// Binary checkpoint container:
//   "SPCK" | u32 version | u64 header length | JSON header | float32 tensors
// The header holds the encoder config, vocabulary, label set, tensor names
// and shapes, and free-form run metadata. All integers and floats are
// little-endian; tensors are row-major in header order.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spanparse/error.hpp"
#include "spanparse/model.hpp"

namespace spanparse {

inline constexpr char kCheckpointMagic[4] = {'S', 'P', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams<float> params;
  nlohmann::json meta = nlohmann::json::object();
};

namespace detail {

template <class U>
void put_le(std::string& out, U value) {
  static_assert(std::is_unsigned_v<U>);
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<char>((value >> (8 * b)) & 0xff));
}

template <class U>
U get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(U) > in.size()) throw ModelError("checkpoint truncated");
  U value = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    value |= static_cast<U>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  }
  pos += sizeof(U);
  return value;
}

inline nlohmann::json config_to_json(const EncoderConfig& c) {
  return {{"d_model", c.d_model}, {"n_layers", c.n_layers}, {"n_heads", c.n_heads},   {"d_ff", c.d_ff},
          {"d_span", c.d_span},   {"d_external", c.d_external}, {"seed", c.seed}};
}

inline EncoderConfig config_from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.d_model = j.at("d_model").get<std::size_t>();
  c.n_layers = j.at("n_layers").get<std::size_t>();
  c.n_heads = j.at("n_heads").get<std::size_t>();
  c.d_ff = j.at("d_ff").get<std::size_t>();
  c.d_span = j.at("d_span").get<std::size_t>();
  c.d_external = j.at("d_external").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace detail

inline nlohmann::json encoder_config_json(const EncoderConfig& c) { return detail::config_to_json(c); }

inline std::string checkpoint_bytes(const ModelParams<float>& p, const nlohmann::json& meta = nlohmann::json::object()) {
  nlohmann::json header;
  header["format"] = "spanparse-checkpoint";
  header["version"] = kCheckpointVersion;
  header["dtype"] = "float32";
  header["config"] = detail::config_to_json(p.config);
  header["vocabulary"] = p.vocab.words();
  header["labels"] = p.labels->names();
  header["meta"] = meta;
  auto& tensors = header["tensors"] = nlohmann::json::array();
  for (const auto& [name, m] : p.weights.named_tensors()) {
    tensors.push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});
  }
  const std::string text = header.dump();
  std::string out(kCheckpointMagic, 4);
  detail::put_le<std::uint32_t>(out, kCheckpointVersion);
  detail::put_le<std::uint64_t>(out, text.size());
  out += text;
  for (const auto& [name, m] : p.weights.named_tensors()) {
    for (Eigen::Index k = 0; k < m->size(); ++k) detail::put_le(out, std::bit_cast<std::uint32_t>(m->data()[k]));
  }
  return out;
}

inline Checkpoint checkpoint_from_bytes(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw ModelError("not a spanparse checkpoint (bad magic)");
  }
  std::size_t pos = 4;
  const auto version = detail::get_le<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) throw ModelError("unsupported checkpoint version " + std::to_string(version));
  const auto header_len = detail::get_le<std::uint64_t>(bytes, pos);
  if (header_len > bytes.size() - pos) throw ModelError("checkpoint truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(pos, header_len));
    pos += header_len;
    if (header.at("dtype").get<std::string>() != "float32") throw ModelError("unsupported checkpoint dtype");
    Checkpoint ck;
    const auto config = detail::config_from_json(header.at("config"));
    const auto vocab = Vocabulary::from_ordered(header.at("vocabulary").get<std::vector<std::string>>());
    const auto labels = LabelSet::from_ordered(header.at("labels").get<std::vector<std::string>>());
    ck.params = init_params<float>(config, vocab, labels);
    ck.meta = header.value("meta", nlohmann::json::object());
    const auto& tensors = header.at("tensors");
    std::vector<Mat<float>*> dst = ck.params.weights.tensors();
    const auto names = ck.params.weights.named_tensors();
    if (tensors.size() != dst.size()) throw ModelError("checkpoint tensor count does not match its config");
    for (std::size_t k = 0; k < dst.size(); ++k) {
      const auto& t = tensors[k];
      if (t.at("name").get<std::string>() != names[k].first || t.at("rows").get<Eigen::Index>() != dst[k]->rows() ||
          t.at("cols").get<Eigen::Index>() != dst[k]->cols()) {
        throw ModelError("checkpoint tensor '" + t.at("name").get<std::string>() + "' does not match its config");
      }
      for (Eigen::Index i = 0; i < dst[k]->size(); ++i) {
        dst[k]->data()[i] = std::bit_cast<float>(detail::get_le<std::uint32_t>(bytes, pos));
      }
      if (!dst[k]->allFinite()) throw ModelError("checkpoint tensor '" + names[k].first + "' has non-finite values");
    }
    if (pos != bytes.size()) throw ModelError("trailing bytes after checkpoint tensors");
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed checkpoint header: ") + e.what());
  }
}

inline void save_checkpoint(const std::string& path, const ModelParams<float>& p,
                            const nlohmann::json& meta = nlohmann::json::object()) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  const std::string bytes = checkpoint_bytes(p, meta);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return checkpoint_from_bytes(ss.str());
  } catch (const ModelError& e) {
    throw ModelError(path + ": " + e.what());
  }
}

}  // namespace spanparse

#endif  // SPANPARSE_CHECKPOINT_HPP_
