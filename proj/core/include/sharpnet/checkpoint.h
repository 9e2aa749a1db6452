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

#ifndef SHARPNET_CHECKPOINT_H_
#define SHARPNET_CHECKPOINT_H_

#include <filesystem>
#include <iosfwd>

#include "sharpnet/model.h"

namespace sharpnet {

// Checkpoint container:
//   "TNSR" | u8 version (1) | u8 0x7F (container marker) |
//   u32 LE header length | UTF-8 JSON header | TNSR1 f64 records
// The header carries the model config, the parameter manifest (name, shape,
// byte offset of each record relative to the first record) and, when
// present, the Adam step counter, hyperparameters and moment offsets.
inline constexpr std::uint8_t kCheckpointMarker = 0x7F;

void WriteCheckpoint(std::ostream& out, const SharpNet& net);
SharpNet ReadCheckpoint(std::istream& in);

void SaveCheckpoint(const std::filesystem::path& path, const SharpNet& net);
SharpNet LoadCheckpoint(const std::filesystem::path& path);

}  // namespace sharpnet

#endif  // SHARPNET_CHECKPOINT_H_
