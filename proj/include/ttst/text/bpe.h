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

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ttst {

// Tokenized text: the transducer's encoder axis.
struct TokenSeq {
  std::vector<int> ids;
  std::string text;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
};

// Character-level byte-pair-encoding vocabulary.
//
// Ids are dense: base symbols first (sorted by their UTF-8 bytes), then one
// id per merge in training order, then the padding id. Whitespace symbols
// are never merged with anything, so tokens never span a word boundary.
class BpeVocab {
 public:
  BpeVocab() = default;

  const std::vector<std::string>& base_symbols() const { return base_; }
  const std::vector<std::pair<std::string, std::string>>& merges() const {
    return merges_;
  }

  // Number of ids including padding.
  int size() const { return static_cast<int>(tokens_.size()) + 1; }
  int pad_id() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const;
  int id(std::string_view token) const;  // -1 when absent

  TokenSeq encode(std::string_view text) const;
  std::string decode(const std::vector<int>& ids) const;

  void save(std::ostream& out) const;
  static BpeVocab load(std::istream& in);
  void save(const std::string& path) const;
  static BpeVocab load(const std::string& path);

  // Trains greedy merges until `vocab_size` tokens (base + merges) exist or
  // no adjacent non-whitespace pair is left. The most frequent pair wins;
  // ties go to the lexicographically smallest (left, right).
  static BpeVocab train(const std::vector<std::string>& corpus, int vocab_size);
  // One token per character, no merges.
  static BpeVocab characters(const std::vector<std::string>& corpus);

  static BpeVocab from_parts(std::vector<std::string> base,
                             std::vector<std::pair<std::string, std::string>> merges);

 private:
  void rebuild_index();

  std::vector<std::string> base_;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Splits UTF-8 text into code-point strings. Invalid sequences are passed
// through byte by byte.
std::vector<std::string> split_characters(std::string_view text);

bool is_whitespace_symbol(std::string_view symbol);

}  // namespace ttst
