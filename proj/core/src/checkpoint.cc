// Copyright 2026 The sharpnet Authors. All Rights Reserved.
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

#include "sharpnet/checkpoint.h"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "sharpnet/error.h"
#include "sharpnet/tnsr.h"

namespace sharpnet {
namespace {

using nlohmann::json;

std::size_t RecordBytes(const Tensor& t) { return 7 + 4 * t.rank() + 8 * t.size(); }

}  // namespace

void WriteCheckpoint(std::ostream& out, const SharpNet& net) {
  std::vector<const Tensor*> records;
  std::size_t offset = 0;
  auto add_record = [&](const Tensor& t) {
    const std::size_t at = offset;
    records.push_back(&t);
    offset += RecordBytes(t);
    return at;
  };

  json manifest = json::array();
  for (const auto& [name, tensor] : net.parameters().entries()) {
    manifest.push_back({{"name", name}, {"shape", tensor.shape()}, {"offset", add_record(tensor)}});
  }
  json header = {{"format", "sharpnet-checkpoint"},
                 {"config", ConfigToJson(net.config())},
                 {"parameters", manifest},
                 {"adam", nullptr}};
  if (const auto& adam = net.adam_state(); adam.has_value()) {
    json moments = json::array();
    for (const auto& [name, m] : adam->moments) {
      Require(!m.m.empty() && !m.v.empty(), ErrorCode::kContract,
              "adam moments for '" + name + "' are uninitialized");
      const std::size_t m_at = add_record(m.m);
      const std::size_t v_at = add_record(m.v);
      moments.push_back({{"name", name}, {"m_offset", m_at}, {"v_offset", v_at}});
    }
    header["adam"] = {{"step", adam->step},
                      {"lr", adam->config.lr},
                      {"beta1", adam->config.beta1},
                      {"beta2", adam->config.beta2},
                      {"eps", adam->config.eps},
                      {"moments", moments}};
  }

  const std::string text = header.dump();
  out.write(kTnsrMagic, sizeof(kTnsrMagic));
  out.put(static_cast<char>(kTnsrVersion));
  out.put(static_cast<char>(kCheckpointMarker));
  WriteU32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const Tensor* t : records) WriteTensor(out, *t, DType::kF64);
  Require(static_cast<bool>(out), ErrorCode::kIo, "failed writing checkpoint");
}

SharpNet ReadCheckpoint(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  Require(in.gcount() == 4 && std::memcmp(magic, kTnsrMagic, 4) == 0, ErrorCode::kFormat,
          "not a checkpoint: bad magic");
  const int version = in.get();
  Require(version == kTnsrVersion, ErrorCode::kFormat,
          "unsupported checkpoint version " + std::to_string(version));
  Require(in.get() == kCheckpointMarker, ErrorCode::kFormat,
          "TNSR file is a plain tensor, not a checkpoint");
  const std::uint32_t length = ReadU32(in);
  std::string text(length, '\0');
  in.read(text.data(), length);
  Require(in.gcount() == static_cast<std::streamsize>(length), ErrorCode::kFormat,
          "truncated checkpoint header");

  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("corrupt checkpoint header: ") + e.what());
  }
  Require(header.value("format", "") == "sharpnet-checkpoint", ErrorCode::kFormat,
          "checkpoint header has the wrong format tag");

  try {
    const SharpNetConfig config = ConfigFromJson(header.at("config"));
    std::size_t offset = 0;
    auto read_record = [&](std::size_t expected_offset) {
      Require(expected_offset == offset, ErrorCode::kFormat, "checkpoint record offset mismatch");
      Tensor t = ReadTensor(in);
      offset += RecordBytes(t);
      return t;
    };

    ParameterStore params;
    for (const json& entry : header.at("parameters")) {
      Tensor t = read_record(entry.at("offset").get<std::size_t>());
      Require(t.shape() == entry.at("shape").get<Shape>(), ErrorCode::kFormat,
              "checkpoint shape mismatch for parameter " + entry.at("name").get<std::string>());
      params.Add(entry.at("name").get<std::string>(), std::move(t));
    }
    SharpNet net(config, std::move(params));

    const json& adam = header.at("adam");
    if (!adam.is_null()) {
      AdamState state;
      state.step = adam.at("step").get<std::int64_t>();
      state.config.lr = adam.at("lr").get<double>();
      state.config.beta1 = adam.at("beta1").get<double>();
      state.config.beta2 = adam.at("beta2").get<double>();
      state.config.eps = adam.at("eps").get<double>();
      for (const json& entry : adam.at("moments")) {
        AdamMoments m;
        m.m = read_record(entry.at("m_offset").get<std::size_t>());
        m.v = read_record(entry.at("v_offset").get<std::size_t>());
        state.moments.emplace(entry.at("name").get<std::string>(), std::move(m));
      }
      net.adam_state() = std::move(state);
    }
    return net;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("corrupt checkpoint header: ") + e.what());
  }
}

void SaveCheckpoint(const std::filesystem::path& path, const SharpNet& net) {
  std::ofstream out(path, std::ios::binary);
  Require(static_cast<bool>(out), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  WriteCheckpoint(out, net);
}

SharpNet LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path.string());
  return ReadCheckpoint(in);
}

}  // namespace sharpnet
