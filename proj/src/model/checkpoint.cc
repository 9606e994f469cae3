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

#include "ttst/model/checkpoint.h"

#include <fstream>
#include <istream>
#include <ostream>

#include "ttst/codec/io.h"
#include "ttst/common/errors.h"

namespace ttst {

const TensorRecord* Checkpoint::find(const std::string& name) const {
  for (const auto& r : records) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write("TTSX", 4);
  binio::put_u32(out, Checkpoint::kVersion);
  const std::string meta = ckpt.meta.dump();
  binio::put_u64(out, meta.size());
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  for (const auto& r : ckpt.records) {
    std::size_t n = 1;
    for (auto d : r.dims) n *= d;
    if (n != r.values.size()) throw ValidationError("checkpoint record " + r.name + ": bad size");
    binio::put_u32(out, static_cast<std::uint32_t>(r.name.size()));
    out.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
    binio::put_u32(out, static_cast<std::uint32_t>(r.dims.size()));
    for (auto d : r.dims) binio::put_u32(out, d);
    for (float v : r.values) binio::put_f32(out, v);
  }
  if (!out) throw IoError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  binio::expect_magic(in, "TTSX", "checkpoint");
  const std::uint32_t version = binio::get_u32(in);
  if (version != Checkpoint::kVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint64_t len = binio::get_u64(in);
  if (len > (1ULL << 30)) throw IoError("checkpoint: implausible metadata length");
  std::string meta(len, '\0');
  in.read(meta.data(), static_cast<std::streamsize>(len));
  if (!in) throw IoError("checkpoint: truncated metadata");
  Checkpoint ckpt;
  try {
    ckpt.meta = Json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint: bad metadata JSON: ") + e.what());
  }
  while (in.peek() != std::char_traits<char>::eof()) {
    TensorRecord r;
    const std::uint32_t name_len = binio::get_u32(in);
    if (name_len > 4096) throw IoError("checkpoint: implausible record name length");
    r.name.resize(name_len);
    in.read(r.name.data(), name_len);
    const std::uint32_t rank = binio::get_u32(in);
    if (rank > 8) throw IoError("checkpoint: implausible rank for " + r.name);
    std::size_t n = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      r.dims.push_back(binio::get_u32(in));
      n *= r.dims.back();
    }
    if (n > (1ULL << 31)) throw IoError("checkpoint: implausible record size for " + r.name);
    r.values.resize(n);
    for (auto& v : r.values) v = binio::get_f32(in);
    if (!in) throw IoError("checkpoint: truncated record " + r.name);
    ckpt.records.push_back(std::move(r));
  }
  return ckpt;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  try {
    write_checkpoint(out, ckpt);
  } catch (const Error& e) {
    throw IoError(path + ": " + e.what());
  }
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  try {
    return read_checkpoint(in);
  } catch (const Error& e) {
    throw IoError(path + ": " + e.what());
  }
}

template <typename T>
TensorRecord to_record(const std::string& name, const Mat<T>& m) {
  TensorRecord r;
  r.name = name;
  r.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  r.values.resize(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.size(); ++i) r.values[static_cast<std::size_t>(i)] = static_cast<float>(m.data()[i]);
  return r;
}

template <typename T>
Mat<T> from_record(const TensorRecord& r, Index rows, Index cols) {
  if (r.dims.size() != 2 || r.dims[0] != rows || r.dims[1] != cols) {
    throw ValidationError("checkpoint record " + r.name + " has the wrong shape");
  }
  Mat<T> m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(r.values[static_cast<std::size_t>(i)]);
  return m;
}

template <typename T>
void append_params(Checkpoint& ckpt, const ParamStore<T>& params) {
  for (const auto& p : params.params()) ckpt.records.push_back(to_record(p->name, p->value));
}

template <typename T>
void load_params(const Checkpoint& ckpt, ParamStore<T>& params) {
  for (const auto& p : params.params()) {
    const TensorRecord* r = ckpt.find(p->name);
    if (r == nullptr) throw ValidationError("checkpoint is missing parameter " + p->name);
    p->value = from_record<T>(*r, p->value.rows(), p->value.cols());
  }
}

template TensorRecord to_record<float>(const std::string&, const Mat<float>&);
template TensorRecord to_record<double>(const std::string&, const Mat<double>&);
template Mat<float> from_record<float>(const TensorRecord&, Index, Index);
template Mat<double> from_record<double>(const TensorRecord&, Index, Index);
template void append_params<float>(Checkpoint&, const ParamStore<float>&);
template void append_params<double>(Checkpoint&, const ParamStore<double>&);
template void load_params<float>(const Checkpoint&, ParamStore<float>&);
template void load_params<double>(const Checkpoint&, ParamStore<double>&);

}  // namespace ttst
