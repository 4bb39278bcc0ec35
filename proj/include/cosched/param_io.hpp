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


// Portable parameter files.
//
// Layout: 8-byte magic "COSCHED\0", u32 format version, u32 kind, payload,
// u64 FNV-1a checksum of every preceding byte. Integers are little-endian;
// doubles are IEEE-754 binary64 stored little-endian. A network block is
// u32 layer count, then per layer u32 in, u32 out, u32 activation, followed
// by the weights in column-major order and the bias; a leading f64 holds the
// dropout rate.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cosched/ddpg.hpp"
#include "cosched/mlp.hpp"
#include "cosched/models.hpp"

namespace cosched {

enum class ParamKind : std::uint32_t { kMlp = 0, kModelA = 1, kModelB = 2, kAgent = 3 };
inline constexpr std::uint32_t kParamFormatVersion = 2;

std::vector<std::uint8_t> encode_mlp(const Mlp& net);
Mlp decode_mlp(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_model_a(const ModelA& model);
ModelA decode_model_a(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_model_b(const ModelB& model);
ModelB decode_model_b(const std::vector<std::uint8_t>& bytes);
// Networks and hyper-parameters; the experience pool is not persisted.
std::vector<std::uint8_t> encode_agent(const Agent& agent);
Agent decode_agent(const std::vector<std::uint8_t>& bytes);

ParamKind peek_param_kind(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

void save_mlp(const std::string& path, const Mlp& net);
Mlp load_mlp(const std::string& path);
void save_model_a(const std::string& path, const ModelA& model);
ModelA load_model_a(const std::string& path);
void save_model_b(const std::string& path, const ModelB& model);
ModelB load_model_b(const std::string& path);
void save_agent(const std::string& path, const Agent& agent);
Agent load_agent(const std::string& path);

}  // namespace cosched
