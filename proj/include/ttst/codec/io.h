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

#include "ttst/codec/rvq.h"

namespace ttst {

// Code file: "TTSC", u32 version (1), u32 T, u32 K, then T*K little-endian u16
// codes, frame-major.
void write_codes(std::ostream& out, const CodeGrid& grid);
CodeGrid read_codes(std::istream& in);
void write_codes(const std::string& path, const CodeGrid& grid);
CodeGrid read_codes(const std::string& path);

// Feature file: "TTSF", u32 T, u32 d, then T*d little-endian f32, row-major.
void write_features(std::ostream& out, const FeatureSeq& features);
FeatureSeq read_features(std::istream& in);
void write_features(const std::string& path, const FeatureSeq& features);
FeatureSeq read_features(const std::string& path);

namespace binio {

void put_u16(std::ostream& out, std::uint16_t v);
void put_u32(std::ostream& out, std::uint32_t v);
void put_u64(std::ostream& out, std::uint64_t v);
void put_f32(std::ostream& out, float v);
std::uint16_t get_u16(std::istream& in);
std::uint32_t get_u32(std::istream& in);
std::uint64_t get_u64(std::istream& in);
float get_f32(std::istream& in);
void expect_magic(std::istream& in, const char (&magic)[5], const std::string& what);

}  // namespace binio

}  // namespace ttst
