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

#include "ttst/common/json_util.h"

#include <algorithm>
#include <cstring>

namespace ttst {

void require_keys(const Json& j, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* a) { return key == a; });
    if (!ok) throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

}  // namespace ttst
