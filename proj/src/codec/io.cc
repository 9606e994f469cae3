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

#include "ttst/codec/io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ttst/common/errors.h"

namespace ttst {

namespace binio {

namespace {

template <typename U>
void put_le(std::ostream& out, U v) {
  unsigned char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(U));
}

template <typename U>
U get_le(std::istream& in) {
  unsigned char buf[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(U))) {
    throw IoError("unexpected end of binary data");
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void put_u16(std::ostream& out, std::uint16_t v) { put_le(out, v); }
void put_u32(std::ostream& out, std::uint32_t v) { put_le(out, v); }
void put_u64(std::ostream& out, std::uint64_t v) { put_le(out, v); }
void put_f32(std::ostream& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
std::uint16_t get_u16(std::istream& in) { return get_le<std::uint16_t>(in); }
std::uint32_t get_u32(std::istream& in) { return get_le<std::uint32_t>(in); }
std::uint64_t get_u64(std::istream& in) { return get_le<std::uint64_t>(in); }
float get_f32(std::istream& in) { return std::bit_cast<float>(get_le<std::uint32_t>(in)); }

void expect_magic(std::istream& in, const char (&magic)[5], const std::string& what) {
  char buf[4];
  if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    throw IoError(what + ": bad magic, expected " + std::string(magic, 4));
  }
}

}  // namespace binio

void write_codes(std::ostream& out, const CodeGrid& grid) {
  out.write("TTSC", 4);
  binio::put_u32(out, 1);
  binio::put_u32(out, static_cast<std::uint32_t>(grid.frames()));
  binio::put_u32(out, static_cast<std::uint32_t>(grid.books()));
  for (int c : grid.data()) {
    if (c < 0 || c > 0xffff) throw ValidationError("code does not fit in u16");
    binio::put_u16(out, static_cast<std::uint16_t>(c));
  }
}

CodeGrid read_codes(std::istream& in) {
  binio::expect_magic(in, "TTSC", "code file");
  const std::uint32_t version = binio::get_u32(in);
  if (version != 1) throw IoError("code file: unsupported version " + std::to_string(version));
  const std::uint32_t frames = binio::get_u32(in);
  const std::uint32_t books = binio::get_u32(in);
  if (frames > (1u << 24) || books > 1024) throw IoError("code file: implausible shape");
  CodeGrid grid(static_cast<int>(frames), static_cast<int>(books));
  for (std::uint32_t j = 0; j < frames; ++j) {
    for (std::uint32_t k = 0; k < books; ++k) {
      grid.at(static_cast<int>(j), static_cast<int>(k)) = binio::get_u16(in);
    }
  }
  return grid;
}

void write_features(std::ostream& out, const FeatureSeq& features) {
  out.write("TTSF", 4);
  binio::put_u32(out, static_cast<std::uint32_t>(features.rows()));
  binio::put_u32(out, static_cast<std::uint32_t>(features.cols()));
  for (Index i = 0; i < features.size(); ++i) {
    binio::put_f32(out, static_cast<float>(features.data()[i]));
  }
}

FeatureSeq read_features(std::istream& in) {
  binio::expect_magic(in, "TTSF", "feature file");
  const std::uint32_t frames = binio::get_u32(in);
  const std::uint32_t dim = binio::get_u32(in);
  if (frames > (1u << 24) || dim > (1u << 16)) throw IoError("feature file: implausible shape");
  FeatureSeq f(frames, dim);
  for (Index i = 0; i < f.size(); ++i) f.data()[i] = binio::get_f32(in);
  return f;
}

void write_codes(const std::string& path, const CodeGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_codes(out, grid);
  if (!out) throw IoError("write failed: " + path);
}

CodeGrid read_codes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  try {
    return read_codes(in);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_features(const std::string& path, const FeatureSeq& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_features(out, features);
  if (!out) throw IoError("write failed: " + path);
}

FeatureSeq read_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  try {
    return read_features(in);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace ttst
