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

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "ttst/common/errors.h"

namespace ttst {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Throws ConfigError if `j` is not an object or holds a key outside `allowed`.
void require_keys(const Json& j, std::initializer_list<const char*> allowed,
                  const std::string& where);

// Reads j[key] into out when present; type errors become ConfigError.
template <typename V>
void read_opt(const Json& j, const char* key, V& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<V>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace ttst
