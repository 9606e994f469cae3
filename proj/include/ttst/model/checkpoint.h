// Copyright 2026 The ttst Authors
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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ttst/common/json_util.h"
#include "ttst/numerics/tensor.h"

namespace ttst {

struct TensorRecord {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

// "TTSX", u32 version, u64 JSON length, JSON bytes, then records until end of
// file: u32 name length, name bytes, u32 rank, rank x u32 dims, f32 values.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  Json meta;
  std::vector<TensorRecord> records;

  const TensorRecord* find(const std::string& name) const;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

template <typename T>
TensorRecord to_record(const std::string& name, const Mat<T>& m);
// Throws ValidationError when the record's shape differs from rows x cols.
template <typename T>
Mat<T> from_record(const TensorRecord& r, Index rows, Index cols);

// One record per Param, in store order.
template <typename T>
void append_params(Checkpoint& ckpt, const ParamStore<T>& params);
// Every Param must be present with the same shape.
template <typename T>
void load_params(const Checkpoint& ckpt, ParamStore<T>& params);

}  // namespace ttst
