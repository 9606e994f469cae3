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

#include "ttst/codec/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ttst/codec/io.h"
#include "ttst/common/errors.h"
#include "ttst/numerics/rng.h"

namespace ttst {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTokenFeatureSalt = 0x70c3a1f5e2d4b697ULL;
constexpr std::uint64_t kReferenceStream = 0x5245;  // "RE"

std::string utterance_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "utt%04d", i);
  return buf;
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory " + p.string() + ": " + ec.message());
}

std::string read_text_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void ToySpeaker::validate(int feature_dim) const {
  if (!(duration_factor >= 1.0 && duration_factor <= 8.0)) {
    throw ConfigError("speaker " + id + ": duration_factor must be in [1, 8]");
  }
  if (static_cast<int>(timbre_offset.size()) != feature_dim) {
    throw DimensionError("speaker " + id + ": timbre offset has wrong dimension");
  }
}

std::vector<int> synth_durations(const TokenSeq& tokens, const ToySpeaker& speaker,
                                 std::uint64_t seed, double jitter) {
  Rng rng(seed);
  std::vector<int> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double u = rng.uniform(-jitter, jitter);
    out.push_back(std::max(1, static_cast<int>(std::lround(speaker.duration_factor * (1.0 + u)))));
  }
  return out;
}

FeatureSeq synth_features(const TokenSeq& tokens, const ToySpeaker& speaker, int feature_dim,
                          std::uint64_t seed, double jitter) {
  if (tokens.empty()) throw InputError("synth_features: empty token sequence");
  speaker.validate(feature_dim);
  const std::vector<int> durations = synth_durations(tokens, speaker, seed, jitter);
  int total = 0;
  for (int d : durations) total += d;
  FeatureSeq out(total, feature_dim);
  int frame = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    Rng token_rng(mix_seed(kTokenFeatureSalt, static_cast<std::uint64_t>(tokens.ids[i])));
    Eigen::RowVectorXd base(feature_dim);
    for (int c = 0; c < feature_dim; ++c) {
      base(c) = token_rng.uniform(-0.6, 0.6) + speaker.timbre_offset[static_cast<std::size_t>(c)];
    }
    for (int r = 0; r < durations[i]; ++r, ++frame) {
      for (int c = 0; c < feature_dim; ++c) out(frame, c) = static_cast<float>(base(c));
    }
  }
  return out;
}

std::vector<ToySpeaker> default_speakers(int count, int feature_dim, std::uint64_t seed) {
  if (count < 1) throw ConfigError("need at least one speaker");
  Rng rng(mix_seed(seed, 0x53504b));
  std::vector<ToySpeaker> out;
  for (int i = 0; i < count; ++i) {
    ToySpeaker s;
    s.id = "spk" + std::to_string(i);
    s.duration_factor = i % 2 == 0 ? 2.0 : 4.0;
    for (int c = 0; c < feature_dim; ++c) {
      s.timbre_offset.push_back(static_cast<float>(0.2 * rng.normal()));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> random_sentences(int count, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x54585431));
  const std::string letters = "abcdefgh";
  std::vector<std::string> lexicon;
  while (lexicon.size() < 24) {
    const int len = 2 + static_cast<int>(rng.below(4));
    std::string w;
    for (int i = 0; i < len; ++i) w += letters[static_cast<std::size_t>(rng.below(8))];
    if (std::find(lexicon.begin(), lexicon.end(), w) == lexicon.end()) lexicon.push_back(w);
  }
  std::vector<std::string> out;
  while (static_cast<int>(out.size()) < count) {
    const int words = 3 + static_cast<int>(rng.below(4));
    std::string s;
    for (int i = 0; i < words; ++i) {
      if (i) s += ' ';
      s += lexicon[static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(lexicon.size())))];
    }
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  }
  return out;
}

CorpusStats corpus_generate(const BpeVocab& vocab, const std::vector<std::string>& sentences,
                            const std::vector<ToySpeaker>& speakers, const Codebooks& books,
                            const std::string& out_dir, const CorpusOptions& options) {
  if (speakers.empty()) throw ConfigError("corpus_generate: need at least one speaker");
  if (sentences.empty()) throw InputError("corpus_generate: no sentences");
  const CodecSpec& spec = books.spec;
  for (const auto& s : speakers) s.validate(spec.feature_dim);
  if (options.heldout < 0 || options.heldout >= static_cast<int>(sentences.size())) {
    throw ConfigError("corpus_generate: heldout count out of range");
  }

  const fs::path root(out_dir);
  ensure_dir(root / "codes");
  ensure_dir(root / "feats");
  ensure_dir(root / "refs");

  nlohmann::ordered_json info;
  info["seed"] = options.seed;
  info["jitter"] = options.jitter;
  info["codec"] = {{"num_codebooks", spec.num_codebooks},
                   {"codebook_size", spec.codebook_size},
                   {"feature_dim", spec.feature_dim},
                   {"frame_rate", spec.frame_rate},
                   {"level_decay", spec.level_decay}};
  info["speakers"] = nlohmann::ordered_json::array();

  std::vector<std::string> words;
  for (const auto& sentence : sentences) {
    std::istringstream ss(sentence);
    for (std::string w; ss >> w;) words.push_back(w);
  }
  if (words.empty()) throw InputError("corpus_generate: sentences contain no words");
  for (std::size_t s = 0; s < speakers.size(); ++s) {
    const ToySpeaker& spk = speakers[s];
    // Reference: a fresh word sequence, long enough for the GST.
    FeatureSeq ref;
    Rng ref_rng(mix_seed(options.seed, kReferenceStream + s));
    while (ref.rows() < 8) {
      std::string ref_text;
      for (int w = 0; w < 6; ++w) {
        if (w) ref_text += ' ';
        ref_text += words[static_cast<std::size_t>(ref_rng.below(static_cast<std::int64_t>(words.size())))];
      }
      ref = synth_features(vocab.encode(ref_text), spk, spec.feature_dim, ref_rng.next(),
                           options.jitter);
    }
    write_features((root / "refs" / (spk.id + ".ttsf")).string(), ref);
    info["speakers"].push_back({{"id", spk.id},
                                {"duration_factor", spk.duration_factor},
                                {"timbre_offset", spk.timbre_offset}});
  }

  const int n_train = static_cast<int>(sentences.size()) - options.heldout;
  std::ofstream manifest((root / "manifest.jsonl").string(), std::ios::binary);
  std::ofstream heldout((root / "heldout.jsonl").string(), std::ios::binary);
  if (!manifest) throw IoError("cannot write " + (root / "manifest.jsonl").string());
  if (!heldout) throw IoError("cannot write " + (root / "heldout.jsonl").string());

  CorpusStats stats;
  stats.min_frames = std::numeric_limits<int>::max();
  for (int i = 0; i < static_cast<int>(sentences.size()); ++i) {
    const std::string id = utterance_id(i);
    const ToySpeaker& spk = speakers[static_cast<std::size_t>(i) % speakers.size()];
    const TokenSeq tokens = vocab.encode(sentences[static_cast<std::size_t>(i)]);
    const FeatureSeq feats = synth_features(tokens, spk, spec.feature_dim,
                                            mix_seed(options.seed, static_cast<std::uint64_t>(i)),
                                            options.jitter);
    const CodeGrid grid = rvq_encode(books, feats);
    grid.validate(spec.codebook_size);
    write_codes((root / "codes" / (id + ".ttsc")).string(), grid);
    write_features((root / "feats" / (id + ".ttsf")).string(), feats);

    nlohmann::ordered_json line;
    line["id"] = id;
    line["text"] = sentences[static_cast<std::size_t>(i)];
    line["speaker"] = spk.id;
    line["codes"] = "codes/" + id + ".ttsc";
    line["ref"] = "refs/" + spk.id + ".ttsf";
    (i < n_train ? manifest : heldout) << line.dump() << '\n';
    if (i < n_train) {
      ++stats.utterances;
    } else {
      ++stats.heldout;
    }
    stats.total_frames += grid.frames();
    stats.min_frames = std::min(stats.min_frames, grid.frames());
    stats.max_frames = std::max(stats.max_frames, grid.frames());
  }
  if (!manifest || !heldout) throw IoError("manifest write failed in " + out_dir);

  vocab.save((root / "vocab.bpe").string());
  write_features((root / "codebooks.ttsf").string(), flatten_codebooks(books));
  std::ofstream info_out((root / "corpus.json").string(), std::ios::binary);
  if (!info_out) throw IoError("cannot write " + (root / "corpus.json").string());
  info_out << info.dump(2) << '\n';
  return stats;
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read manifest " + path);
  std::vector<ManifestEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.id = j.at("id").get<std::string>();
      e.text = j.at("text").get<std::string>();
      e.speaker = j.at("speaker").get<std::string>();
      e.codes = j.at("codes").get<std::string>();
      e.ref = j.at("ref").get<std::string>();
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw InputError(path + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<Utterance> load_utterances(const std::string& manifest_path, const BpeVocab& vocab) {
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<Utterance> out;
  for (auto& e : read_manifest(manifest_path)) {
    Utterance u;
    u.tokens = vocab.encode(e.text);
    u.codes = read_codes((dir / e.codes).string());
    u.ref = read_features((dir / e.ref).string());
    const fs::path feats = dir / "feats" / (e.id + ".ttsf");
    if (fs::exists(feats)) u.features = read_features(feats.string());
    u.entry = std::move(e);
    out.push_back(std::move(u));
  }
  return out;
}

CorpusInfo read_corpus_info(const std::string& corpus_dir) {
  const fs::path p = fs::path(corpus_dir) / "corpus.json";
  CorpusInfo info;
  try {
    const auto j = nlohmann::json::parse(read_text_file(p));
    const auto& c = j.at("codec");
    info.codec.num_codebooks = c.at("num_codebooks").get<int>();
    info.codec.codebook_size = c.at("codebook_size").get<int>();
    info.codec.feature_dim = c.at("feature_dim").get<int>();
    info.codec.frame_rate = c.at("frame_rate").get<double>();
    info.codec.level_decay = c.at("level_decay").get<double>();
    info.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& s : j.at("speakers")) {
      ToySpeaker spk;
      spk.id = s.at("id").get<std::string>();
      spk.duration_factor = s.at("duration_factor").get<double>();
      spk.timbre_offset = s.at("timbre_offset").get<std::vector<double>>();
      info.speakers.push_back(std::move(spk));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(p.string() + ": " + ex.what());
  }
  return info;
}

Codebooks read_codebooks(const std::string& corpus_dir) {
  const CorpusInfo info = read_corpus_info(corpus_dir);
  return unflatten_codebooks(info.codec,
                             read_features((fs::path(corpus_dir) / "codebooks.ttsf").string()));
}

}  // namespace ttst
