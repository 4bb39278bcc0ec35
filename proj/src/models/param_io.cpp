// Copyright 2026 The cosched Authors.
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


#include "cosched/param_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cosched/error.hpp"

namespace cosched {
namespace {

constexpr std::array<std::uint8_t, 8> kMagic = {'C', 'O', 'S', 'C', 'H', 'E', 'D', 0};
constexpr std::uint32_t kMaxLayers = 64;
constexpr std::uint32_t kMaxWidth = 1 << 16;

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  explicit Writer(ParamKind kind) {
    bytes_.assign(kMagic.begin(), kMagic.end());
    u32(kParamFormatVersion);
    u32(static_cast<std::uint32_t>(kind));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void mlp(const Mlp& net) {
    f64(net.dropout_rate());
    u32(static_cast<std::uint32_t>(net.layers().size()));
    for (const auto& l : net.layers()) {
      u32(static_cast<std::uint32_t>(l.weights.cols()));
      u32(static_cast<std::uint32_t>(l.weights.rows()));
      u32(static_cast<std::uint32_t>(l.activation));
      for (Eigen::Index i = 0; i < l.weights.size(); ++i) f64(l.weights.data()[i]);
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) f64(l.bias(i));
    }
  }
  void server(const ServerSpec& s) {
    str(s.platform_id);
    u32(static_cast<std::uint32_t>(s.n_cores));
    u32(static_cast<std::uint32_t>(s.n_llc_ways));
    u32(static_cast<std::uint32_t>(s.mem_bw_units));
    f64(s.way_mb);
    f64(s.freq_ghz);
    f64(s.mem_bw_gbps);
  }
  std::vector<std::uint8_t> finish() {
    u64(fnv1a(bytes_.data(), bytes_.size()));
    return std::move(bytes_);
  }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, ParamKind expected) : bytes_(bytes) {
    constexpr std::size_t kHeader = 8 + 4 + 4;
    if (bytes.size() < kHeader + 8) fail("file too short");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) fail("bad magic");
    end_ = bytes.size() - 8;
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) stored |= std::uint64_t{bytes[end_ + i]} << (8 * i);
    if (stored != fnv1a(bytes.data(), end_)) fail("checksum mismatch");
    pos_ = 8;
    const std::uint32_t version = u32();
    if (version != kParamFormatVersion) {
      fail("unsupported format version " + std::to_string(version));
    }
    const auto kind = static_cast<ParamKind>(u32());
    if (kind != expected) fail("file holds a different parameter kind");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  Mlp mlp() {
    const double dropout = f64();
    const std::uint32_t n_layers = u32();
    if (n_layers == 0 || n_layers > kMaxLayers) fail("bad layer count");
    std::vector<int> dims;
    std::vector<DenseLayer> layers;
    for (std::uint32_t k = 0; k < n_layers; ++k) {
      const std::uint32_t in = u32(), out = u32(), act = u32();
      if (in == 0 || out == 0 || in > kMaxWidth || out > kMaxWidth) fail("bad layer width");
      if (act > static_cast<std::uint32_t>(Activation::kSoftmax)) fail("bad activation tag");
      if (!dims.empty() && dims.back() != static_cast<int>(in)) fail("layer widths do not chain");
      if (dims.empty()) dims.push_back(static_cast<int>(in));
      dims.push_back(static_cast<int>(out));
      DenseLayer l;
      l.activation = static_cast<Activation>(act);
      l.weights.resize(out, in);
      for (Eigen::Index i = 0; i < l.weights.size(); ++i) l.weights.data()[i] = f64();
      l.bias.resize(out);
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = f64();
      layers.push_back(std::move(l));
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) fail("bad dropout rate");
    Mlp net(dims, layers.back().activation, dropout, 0);
    net.layers() = std::move(layers);
    return net;
  }
  ServerSpec server() {
    ServerSpec s;
    s.platform_id = str();
    s.n_cores = static_cast<int>(u32());
    s.n_llc_ways = static_cast<int>(u32());
    s.mem_bw_units = static_cast<int>(u32());
    s.way_mb = f64();
    s.freq_ghz = f64();
    s.mem_bw_gbps = f64();
    try {
      s.validate();
    } catch (const Error& e) {
      fail(e.what());
    }
    return s;
  }
  void done() const {
    if (pos_ != end_) fail("trailing bytes after payload");
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) fail("truncated payload");
  }
  [[noreturn]] static void fail(const std::string& why) {
    throw Error(ErrorCode::kIo, "parameter file: " + why);
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_mlp(const Mlp& net) {
  Writer w(ParamKind::kMlp);
  w.mlp(net);
  return w.finish();
}

Mlp decode_mlp(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes, ParamKind::kMlp);
  Mlp net = r.mlp();
  r.done();
  return net;
}

std::vector<std::uint8_t> encode_model_a(const ModelA& model) {
  Writer w(ParamKind::kModelA);
  w.server(model.server());
  w.mlp(model.net());
  return w.finish();
}

ModelA decode_model_a(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes, ParamKind::kModelA);
  ServerSpec s = r.server();
  Mlp net = r.mlp();
  r.done();
  return ModelA(std::move(s), std::move(net));
}

std::vector<std::uint8_t> encode_model_b(const ModelB& model) {
  Writer w(ParamKind::kModelB);
  w.server(model.server());
  w.mlp(model.net());
  return w.finish();
}

ModelB decode_model_b(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes, ParamKind::kModelB);
  ServerSpec s = r.server();
  Mlp net = r.mlp();
  r.done();
  return ModelB(std::move(s), std::move(net));
}

std::vector<std::uint8_t> encode_agent(const Agent& agent) {
  const AgentConfig& c = agent.config();
  Writer w(ParamKind::kAgent);
  w.u32(static_cast<std::uint32_t>(c.state_dim));
  w.f64(c.gamma);
  w.f64(c.tau);
  w.f64(c.actor_lr);
  w.f64(c.critic_lr);
  w.f64(c.noise_mean);
  w.f64(c.noise_sigma);
  w.f64(c.noise_decay);
  w.f64(c.entropy_weight);
  w.u64(c.pool_capacity);
  w.u32(static_cast<std::uint32_t>(c.batch_size));
  w.u64(c.seed);
  w.mlp(agent.actor());
  w.mlp(agent.critic());
  w.mlp(agent.actor_target());
  w.mlp(agent.critic_target());
  return w.finish();
}

Agent decode_agent(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes, ParamKind::kAgent);
  AgentConfig c;
  c.state_dim = static_cast<int>(r.u32());
  c.gamma = r.f64();
  c.tau = r.f64();
  c.actor_lr = r.f64();
  c.critic_lr = r.f64();
  c.noise_mean = r.f64();
  c.noise_sigma = r.f64();
  c.noise_decay = r.f64();
  c.entropy_weight = r.f64();
  c.pool_capacity = r.u64();
  c.batch_size = static_cast<int>(r.u32());
  c.seed = r.u64();
  Mlp actor = r.mlp(), critic = r.mlp(), actor_t = r.mlp(), critic_t = r.mlp();
  r.done();
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kIo, std::string("parameter file: ") + e.what());
  }
  Agent agent(c);
  agent.load_networks(std::move(actor), std::move(critic), std::move(actor_t),
                      std::move(critic_t));
  return agent;
}

ParamKind peek_param_kind(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kIo, "parameter file: bad magic");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[12 + i]} << (8 * i);
  if (v > static_cast<std::uint32_t>(ParamKind::kAgent)) {
    throw Error(ErrorCode::kIo, "parameter file: unknown kind");
  }
  return static_cast<ParamKind>(v);
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

void save_mlp(const std::string& path, const Mlp& net) { write_file_bytes(path, encode_mlp(net)); }
Mlp load_mlp(const std::string& path) { return decode_mlp(read_file_bytes(path)); }
void save_model_a(const std::string& path, const ModelA& m) { write_file_bytes(path, encode_model_a(m)); }
ModelA load_model_a(const std::string& path) { return decode_model_a(read_file_bytes(path)); }
void save_model_b(const std::string& path, const ModelB& m) { write_file_bytes(path, encode_model_b(m)); }
ModelB load_model_b(const std::string& path) { return decode_model_b(read_file_bytes(path)); }
void save_agent(const std::string& path, const Agent& a) { write_file_bytes(path, encode_agent(a)); }
Agent load_agent(const std::string& path) { return decode_agent(read_file_bytes(path)); }

}  // namespace cosched
