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

#include "ttst/text/bpe.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "ttst/common/errors.h"

namespace ttst {

namespace {

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case ' ': out += "\\s"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i >= s.size()) throw InputError("bpe vocab: dangling escape");
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 's': out += ' '; break;
      default: throw InputError(std::string("bpe vocab: bad escape \\") + s[i]);
    }
  }
  return out;
}

// Applies one merge left to right, non-overlapping.
void apply_merge(std::vector<std::string>& symbols, const std::string& left,
                 const std::string& right) {
  if (symbols.size() < 2) return;
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
      out.push_back(left + right);
      ++i;
    } else {
      out.push_back(std::move(symbols[i]));
    }
  }
  symbols = std::move(out);
}

// Whitespace-delimited words; whitespace runs are returned one symbol each
// as separate single-symbol "words" so they can never merge.
std::vector<std::vector<std::string>> split_words(std::string_view text) {
  std::vector<std::vector<std::string>> words;
  std::vector<std::string> current;
  for (auto& ch : split_characters(text)) {
    if (is_whitespace_symbol(ch)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
      words.push_back({ch});
    } else {
      current.push_back(std::move(ch));
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

}  // namespace

std::vector<std::string> split_characters(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t n = utf8_length(static_cast<unsigned char>(text[i]));
    if (i + n > text.size()) n = 1;
    out.emplace_back(text.substr(i, n));
    i += n;
  }
  return out;
}

bool is_whitespace_symbol(std::string_view s) {
  return s == " " || s == "\t" || s == "\n" || s == "\r";
}

const std::string& BpeVocab::token(int id) const {
  if (id < 0 || id >= static_cast<int>(tokens_.size())) {
    throw IndexError("bpe: token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

int BpeVocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

void BpeVocab::rebuild_index() {
  tokens_ = base_;
  for (const auto& [l, r] : merges_) tokens_.push_back(l + r);
  index_.clear();
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    // A merge can reproduce an existing string; the first id wins.
    index_.emplace(tokens_[i], static_cast<int>(i));
  }
}

BpeVocab BpeVocab::from_parts(std::vector<std::string> base,
                              std::vector<std::pair<std::string, std::string>> merges) {
  BpeVocab v;
  v.base_ = std::move(base);
  v.merges_ = std::move(merges);
  v.rebuild_index();
  return v;
}

BpeVocab BpeVocab::characters(const std::vector<std::string>& corpus) {
  return train(corpus, 0);
}

BpeVocab BpeVocab::train(const std::vector<std::string>& corpus, int vocab_size) {
  std::set<std::string> chars;
  std::map<std::vector<std::string>, long> word_freq;
  for (const auto& line : corpus) {
    for (auto& w : split_words(line)) {
      for (const auto& c : w) chars.insert(c);
      if (!is_whitespace_symbol(w.front())) ++word_freq[w];
    }
  }
  if (chars.empty()) throw InputError("bpe_train: empty corpus");

  std::vector<std::pair<std::vector<std::string>, long>> words(word_freq.begin(),
                                                               word_freq.end());
  std::vector<std::pair<std::string, std::string>> merges;
  const int n_base = static_cast<int>(chars.size());
  while (n_base + static_cast<int>(merges.size()) < vocab_size) {
    std::map<std::pair<std::string, std::string>, long> counts;
    for (const auto& [syms, freq] : words) {
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
        counts[{syms[i], syms[i + 1]}] += freq;
      }
    }
    if (counts.empty()) break;
    // std::map iterates in lexicographic pair order, so the first maximum
    // is the tie-break winner.
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const auto pair = best->first;
    merges.push_back(pair);
    for (auto& [syms, freq] : words) apply_merge(syms, pair.first, pair.second);
  }
  return from_parts(std::vector<std::string>(chars.begin(), chars.end()),
                    std::move(merges));
}

TokenSeq BpeVocab::encode(std::string_view text) const {
  TokenSeq seq;
  seq.text = std::string(text);
  for (auto& word : split_words(text)) {
    for (const auto& c : word) {
      if (!std::binary_search(base_.begin(), base_.end(), c)) {
        throw InputError("bpe_encode: unknown character '" + c + "'");
      }
    }
    if (!is_whitespace_symbol(word.front())) {
      for (const auto& [l, r] : merges_) apply_merge(word, l, r);
    }
    for (const auto& sym : word) seq.ids.push_back(id(sym));
  }
  return seq;
}

std::string BpeVocab::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int i : ids) out += token(i);
  return out;
}

void BpeVocab::save(std::ostream& out) const {
  out << "BPEV1 " << base_.size() << ' ' << merges_.size() << '\n';
  for (const auto& b : base_) out << escape(b) << '\n';
  for (const auto& [l, r] : merges_) out << escape(l) << '\t' << escape(r) << '\n';
}

BpeVocab BpeVocab::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("bpe vocab: missing header");
  std::istringstream hdr(line);
  std::string magic;
  std::size_t n_base = 0, n_merges = 0;
  if (!(hdr >> magic >> n_base >> n_merges) || magic != "BPEV1") {
    throw InputError("bpe vocab: bad header '" + line + "'");
  }
  std::vector<std::string> base;
  for (std::size_t i = 0; i < n_base; ++i) {
    if (!std::getline(in, line)) throw InputError("bpe vocab: truncated base symbols");
    base.push_back(unescape(line));
  }
  if (!std::is_sorted(base.begin(), base.end())) {
    throw InputError("bpe vocab: base symbols not sorted");
  }
  std::vector<std::pair<std::string, std::string>> merges;
  for (std::size_t i = 0; i < n_merges; ++i) {
    if (!std::getline(in, line)) throw InputError("bpe vocab: truncated merges");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw InputError("bpe vocab: merge without tab");
    merges.emplace_back(unescape(line.substr(0, tab)), unescape(line.substr(tab + 1)));
  }
  return from_parts(std::move(base), std::move(merges));
}

void BpeVocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  save(out);
  if (!out) throw IoError("write failed: " + path);
}

BpeVocab BpeVocab::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return load(in);
}

}  // namespace ttst
