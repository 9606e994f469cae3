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

#include "ttst/cli/commands.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "ttst/codec/io.h"
#include "ttst/rnnt/rnnt.h"
#include "ttst/runtime/train.h"

namespace ttst {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return 3;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  if (dynamic_cast<const DegenerateOutputError*>(&e)) return 5;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InputError*>(&e) ||
      dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const IndexError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const nlohmann::json::exception*>(&e)) {
    return 2;
  }
  return 1;
}

namespace {

constexpr const char* kCodebooksRecord = "codec.codebooks";

std::string vocab_text(const BpeVocab& vocab) {
  std::ostringstream s;
  vocab.save(s);
  return s.str();
}

std::string checkpoint_name(std::int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%06lld.ttsx", static_cast<long long>(step));
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string() + ": " + ec.message());
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("missing ") + what);
  if (!fs::is_regular_file(path)) throw IoError(path + ": no such file");
}

OrderedJson log_line(const StepResult& r) {
  OrderedJson j;
  j["step"] = r.step;
  j["lr"] = r.lr;
  j["rnnt"] = r.loss.rnnt;
  j["ce"] = r.loss.ce;
  j["total"] = r.loss.total;
  j["k"] = r.loss.k();
  return j;
}

// Keeps log lines up to and including `step`.
void truncate_log(const fs::path& path, std::int64_t step) {
  std::vector<std::string> kept;
  {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (Json::parse(line).at("step").get<std::int64_t>() <= step) kept.push_back(line);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot write");
  for (const auto& l : kept) out << l << '\n';
}

void print_histograms(const CodeGrid& codes, int vocab, std::ostream& out) {
  for (int k = 0; k < codes.books(); ++k) {
    std::vector<int> counts(static_cast<std::size_t>(vocab), 0);
    for (int t = 0; t < codes.frames(); ++t) ++counts[static_cast<std::size_t>(codes.at(t, k))];
    std::vector<int> order(counts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
    });
    const auto distinct = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; });
    out << "level " << k << ": " << distinct << " distinct, top";
    for (int i = 0; i < std::min<int>(3, static_cast<int>(distinct)); ++i) {
      out << ' ' << order[static_cast<std::size_t>(i)] << 'x'
          << counts[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    }
    out << '\n';
  }
}

}  // namespace

Checkpoint make_checkpoint(const RunConfig& config, const BpeVocab& vocab, const Codebooks& books,
                           const TtsModel<float>& model, std::int64_t step) {
  Checkpoint ckpt;
  ckpt.meta["model"] = to_json(model.config());
  ckpt.meta["run_config"] = config.to_json();
  ckpt.meta["config_hash"] = config.hash();
  ckpt.meta["step"] = step;
  ckpt.meta["seed"] = config.train.seed;
  ckpt.meta["vocab"] = vocab_text(vocab);
  ckpt.meta["codec"] = to_json(books.spec);
  ckpt.records.push_back(to_record(kCodebooksRecord, flatten_codebooks(books)));
  append_params(ckpt, model.params());
  return ckpt;
}

Bundle load_bundle(const std::string& ckpt_path) {
  require_file(ckpt_path, "--ckpt");
  const Checkpoint ckpt = read_checkpoint(ckpt_path);
  Bundle b;
  try {
    b.config = RunConfig::from_json(ckpt.meta.at("run_config"));
    b.config_hash = ckpt.meta.at("config_hash").get<std::string>();
    b.step = ckpt.meta.at("step").get<std::int64_t>();
    std::istringstream vs(ckpt.meta.at("vocab").get<std::string>());
    b.vocab = BpeVocab::load(vs);
    from_json(ckpt.meta.at("codec"), b.books.spec, "codec");
    ModelConfig mc;
    from_json(ckpt.meta.at("model"), mc, "model");
    b.model = std::make_unique<TtsModel<float>>(mc);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(ckpt_path + ": malformed checkpoint metadata: " + e.what());
  }
  const TensorRecord* rec = ckpt.find(kCodebooksRecord);
  if (!rec) throw IoError(ckpt_path + ": missing " + kCodebooksRecord);
  const auto& s = b.books.spec;
  b.books = unflatten_codebooks(
      s, from_record<double>(*rec, static_cast<Index>(s.num_codebooks) * s.codebook_size,
                             s.feature_dim));
  load_params(ckpt, b.model->params());
  return b;
}

CorpusStats cmd_datagen(const DatagenArgs& args, std::ostream& out) {
  RunConfig cfg = args.config.empty() ? RunConfig{} : RunConfig::load(args.config);
  if (args.sentences) cfg.data.sentences = *args.sentences;
  if (args.speakers) cfg.data.speakers = *args.speakers;
  if (args.seed) cfg.data.seed = *args.seed;
  cfg.validate();
  if (args.out_dir.empty()) throw ConfigError("missing --out-dir");
  const DataConfig& d = cfg.data;

  const auto sentences = random_sentences(d.sentences + d.heldout, d.seed);
  const BpeVocab vocab = d.tokenizer == "bpe" ? BpeVocab::train(sentences, d.vocab_size)
                                              : BpeVocab::characters(sentences);
  const Codebooks books = rvq_init(cfg.codec, d.seed);
  const auto speakers = default_speakers(d.speakers, cfg.codec.feature_dim, d.seed);
  CorpusOptions opts;
  opts.seed = d.seed;
  opts.jitter = d.jitter;
  opts.heldout = d.heldout;
  ensure_dir(args.out_dir);
  const CorpusStats stats = corpus_generate(vocab, sentences, speakers, books, args.out_dir, opts);
  {
    const fs::path p = fs::path(args.out_dir) / "run_config.json";
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError(p.string() + ": cannot write");
    f << cfg.to_json().dump(2) << '\n';
  }
  out << "utterances " << stats.utterances << "\n"
      << "heldout " << stats.heldout << "\n"
      << "speakers " << d.speakers << "\n"
      << "vocab " << vocab.size() << "\n"
      << "frames total " << stats.total_frames << " min " << stats.min_frames << " max "
      << stats.max_frames << "\n"
      << "seed " << d.seed << "\n";
  return stats;
}

std::int64_t cmd_train(const TrainArgs& args, std::ostream& out) {
  if (args.data.empty()) throw ConfigError("missing --data");
  if (args.out.empty()) throw ConfigError("missing --out");
  std::optional<Checkpoint> resume;
  if (!args.resume.empty()) {
    require_file(args.resume, "--resume");
    resume = read_checkpoint(args.resume);
  }
  RunConfig cfg;
  if (!args.config.empty()) {
    cfg = RunConfig::load(args.config);
  } else if (resume) {
    cfg = RunConfig::from_json(resume->meta.at("run_config"));
  }
  const std::string hash = cfg.hash();
  if (resume && resume->meta.value("config_hash", std::string()) != hash) {
    throw ConfigError("config hash " + hash + " does not match checkpoint " + args.resume + " (" +
                      resume->meta.value("config_hash", std::string("?")) + ")");
  }

  const fs::path data(args.data);
  const CorpusInfo info = read_corpus_info(args.data);
  if (info.codec.num_codebooks != cfg.codec.num_codebooks ||
      info.codec.codebook_size != cfg.codec.codebook_size ||
      info.codec.feature_dim != cfg.codec.feature_dim) {
    throw ConfigError("corpus codec does not match codec section of the config");
  }
  const BpeVocab vocab = BpeVocab::load((data / "vocab.bpe").string());
  if (vocab.size() > cfg.model.text_vocab) {
    throw ConfigError("corpus vocabulary has " + std::to_string(vocab.size()) +
                      " ids but model.text_vocab is " + std::to_string(cfg.model.text_vocab));
  }
  const Codebooks books = read_codebooks(args.data);
  const auto utterances = load_utterances((data / "manifest.jsonl").string(), vocab);

  TtsModel<float> model(cfg.model);
  Trainer trainer(model, cfg.train, make_train_items(utterances, cfg.train.reference));
  if (resume) {
    load_params(*resume, model.params());
    trainer.restore_state(*resume);
  }

  const fs::path out_dir(args.out);
  ensure_dir(out_dir);
  const fs::path log_path = out_dir / "train_log.jsonl";
  if (resume) {
    truncate_log(log_path, trainer.step_count());
  } else {
    std::ofstream(log_path, std::ios::trunc);
  }
  std::ofstream log(log_path, std::ios::binary | std::ios::app);
  if (!log) throw IoError(log_path.string() + ": cannot write");

  const TrainConfig& tc = cfg.train;
  const std::int64_t stop = std::min(tc.total_steps, args.until.value_or(tc.total_steps));
  out << "alpha " << tc.alpha << "\n"
      << "config_hash " << hash << "\n"
      << "seed " << tc.seed << "\n"
      << "utterances " << utterances.size() << " params " << param_count(cfg.model) << "\n"
      << "start_step " << trainer.step_count() << " stop_step " << stop << "\n";
  const std::int64_t report_every = std::max<std::int64_t>(1, tc.total_steps / 20);

  auto save = [&](const std::string& name) {
    Checkpoint ckpt = make_checkpoint(cfg, vocab, books, model, trainer.step_count());
    trainer.save_state(ckpt);
    write_checkpoint((out_dir / name).string(), ckpt);
  };

  bool saved_at_stop = false;
  while (trainer.step_count() < stop) {
    const StepResult r = trainer.step();
    log << log_line(r).dump() << '\n';
    saved_at_stop = false;
    if (r.step % report_every == 0 || r.step == stop) {
      out << "step " << r.step << " lr " << r.lr << " rnnt " << r.loss.rnnt << " ce " << r.loss.ce
          << " total " << r.loss.total << "\n";
    }
    if (tc.checkpoint_every > 0 && r.step % tc.checkpoint_every == 0) {
      save(checkpoint_name(r.step));
      saved_at_stop = true;
    }
  }
  log.flush();
  if (!log) throw IoError(log_path.string() + ": write failed");
  if (trainer.step_count() >= tc.total_steps) {
    save("final.ttsx");
  } else if (!saved_at_stop) {
    save(checkpoint_name(trainer.step_count()));
  }
  return trainer.step_count();
}

OrderedJson alignment_report(const JointLogProbGrid& grid, std::span<const int> target) {
  const AlignmentPath path = best_path(grid, target);
  std::vector<int> dwell(static_cast<std::size_t>(grid.positions()), 0);
  for (int pos : path.frame_to_pos) ++dwell[static_cast<std::size_t>(pos)];
  OrderedJson j;
  j["path"] = path.path_string();
  j["frame_to_pos"] = path.frame_to_pos;
  j["dwell"] = dwell;
  j["log_prob"] = path_log_prob(grid, target, path);
  return j;
}

Synthesis cmd_synth(const SynthArgs& args, std::ostream& out) {
  if (args.text.empty()) throw InputError("missing --text");
  if (args.out.empty()) throw ConfigError("missing --out");
  if (!(args.p > 0.0 && args.p <= 1.0)) throw ConfigError("--p must be in (0, 1]");
  Bundle b = load_bundle(args.ckpt);
  require_file(args.ref, "--ref");
  const FeatureSeq ref = read_features(args.ref);
  DecodeConfig dc = b.config.decode;
  dc.p = args.p;
  dc.seed = args.seed;
  Synthesis s = synthesize(args.text, ref, *b.model, b.vocab, b.books, dc);
  out << "seed " << args.seed << "\n"
      << "p " << args.p << "\n"
      << "N " << s.tokens.size() << "\n"
      << "T " << s.frames() << "\n";
  if (s.frames() == 0) throw DegenerateOutputError("decode produced T=0 frames");
  write_features(args.out + ".ttsf", s.features);
  write_codes(args.out + ".ttsc", s.codes);
  print_histograms(s.codes, b.books.spec.codebook_size, out);
  return s;
}

OrderedJson cmd_align(const AlignArgs& args, std::ostream& out) {
  Bundle b = load_bundle(args.ckpt);
  std::string text;
  std::string codes_path;
  std::string ref_path;
  if (!args.manifest_entry.empty()) {
    const auto hash = args.manifest_entry.rfind('#');
    if (hash == std::string::npos) throw ConfigError("--manifest-entry must be <manifest>#<id>");
    const std::string manifest = args.manifest_entry.substr(0, hash);
    const std::string id = args.manifest_entry.substr(hash + 1);
    require_file(manifest, "manifest");
    const fs::path dir = fs::path(manifest).parent_path();
    bool found = false;
    for (const auto& e : read_manifest(manifest)) {
      if (e.id != id) continue;
      text = e.text;
      codes_path = (dir / e.codes).string();
      ref_path = (dir / e.ref).string();
      found = true;
      break;
    }
    if (!found) throw InputError("no entry '" + id + "' in " + manifest);
  } else {
    if (args.text.empty() || args.codes.empty() || args.ref.empty()) {
      throw ConfigError("align needs --manifest-entry or all of --text, --codes, --ref");
    }
    text = args.text;
    codes_path = args.codes;
    ref_path = args.ref;
  }
  require_file(codes_path, "codes");
  require_file(ref_path, "reference");
  const CodeGrid codes = read_codes(codes_path);
  if (codes.frames() == 0) throw InputError(codes_path + ": code sequence has length 0");
  codes.validate(b.books.spec.codebook_size);
  const TokenSeq tokens = b.vocab.encode(text);
  if (tokens.empty()) throw InputError("empty text");
  const FeatureSeq ref = read_features(ref_path);

  const TtsModel<float>& model = *b.model;
  Graph<float> g(false);
  const std::vector<int> first = codes.column(0);
  const Var spk = model.speaker(g, ref.cast<float>());
  const Var enc = model.encode(g, tokens.ids, spk);
  const Var logits = model.joint_logits(g, enc, model.predict(g, first));
  const int n = static_cast<int>(tokens.size());
  const auto grid =
      JointLogProbGrid::from_logits(n, codes.frames(), g.value(logits).cast<double>());
  const OrderedJson j = alignment_report(grid, first);
  out << j.dump() << '\n';
  return j;
}

EvalReport cmd_eval(const EvalArgs& args, std::ostream& out) {
  Bundle b = load_bundle(args.ckpt);
  if (args.manifest.empty()) throw ConfigError("missing --manifest");
  std::string manifest = args.manifest;
  if (fs::is_directory(manifest)) {
    const std::string split = args.split.empty() ? "train" : args.split;
    if (split == "train") {
      manifest = (fs::path(manifest) / "manifest.jsonl").string();
    } else if (split == "heldout") {
      manifest = (fs::path(manifest) / "heldout.jsonl").string();
    } else {
      throw ConfigError("--split must be train or heldout when --manifest is a directory");
    }
  }
  require_file(manifest, "manifest");
  const auto utterances = load_utterances(manifest, b.vocab);
  EvalOptions opts;
  opts.decode = b.config.decode;
  opts.decode.seed = args.seed;
  if (args.p) opts.decode.p = *args.p;
  opts.oracle = args.oracle;
  EvalReport report = evaluate(*b.model, utterances, b.books, opts);
  out << report.to_json().dump(2) << '\n';
  return report;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transducer text-to-speech over residual codec tokens.", "ttst"};
  app.footer("Run configuration (JSON; every key optional, unknown keys rejected). Defaults:\n" +
             RunConfig{}.to_json().dump(2) +
             "\n\nExit codes: 0 ok, 2 usage/config, 3 I/O, 4 numerical failure, "
             "5 degenerate output.");
  app.require_subcommand(1);

  DatagenArgs dg;
  int dg_sentences = 0;
  int dg_speakers = 0;
  std::uint64_t dg_seed = 0;
  auto* c_dg = app.add_subcommand("datagen", "Generate a toy corpus.");
  c_dg->add_option("--config", dg.config, "Run configuration JSON");
  c_dg->add_option("--out-dir", dg.out_dir, "Output directory")->required();
  auto* o_sent = c_dg->add_option("--sentences", dg_sentences, "Training sentences (default 50)");
  auto* o_spk = c_dg->add_option("--speakers", dg_speakers, "Speakers (default 2)");
  auto* o_seed = c_dg->add_option("--seed", dg_seed, "Corpus seed (default 0)");

  TrainArgs tr;
  std::int64_t tr_until = 0;
  auto* c_tr = app.add_subcommand("train", "Train a model on a corpus.");
  c_tr->add_option("--config", tr.config, "Run configuration JSON");
  c_tr->add_option("--data", tr.data, "Corpus directory")->required();
  c_tr->add_option("--out", tr.out, "Output directory")->required();
  c_tr->add_option("--resume", tr.resume, "Checkpoint to resume from");
  auto* o_until = c_tr->add_option("--until", tr_until, "Stop after this step");

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "Synthesize features for a text.");
  c_sy->add_option("--ckpt", sy.ckpt, "Checkpoint")->required();
  c_sy->add_option("--text", sy.text, "Input text")->required();
  c_sy->add_option("--ref", sy.ref, "Reference features (TTSF)")->required();
  c_sy->add_option("--out", sy.out, "Output prefix for .ttsf and .ttsc")->required();
  c_sy->add_option("--p", sy.p, "Nucleus mass for the first codebook")->capture_default_str();
  c_sy->add_option("--seed", sy.seed, "Sampling seed")->capture_default_str();

  AlignArgs al;
  auto* c_al = app.add_subcommand("align", "Best alignment path of codes against text.");
  c_al->add_option("--ckpt", al.ckpt, "Checkpoint")->required();
  c_al->add_option("--manifest-entry", al.manifest_entry, "<manifest.jsonl>#<utterance id>");
  c_al->add_option("--text", al.text, "Input text");
  c_al->add_option("--codes", al.codes, "Codes (TTSC)");
  c_al->add_option("--ref", al.ref, "Reference features (TTSF)");

  EvalArgs ev;
  double ev_p = 0.95;
  auto* c_ev = app.add_subcommand("eval", "Decode a manifest and report metrics as JSON.");
  c_ev->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
  c_ev->add_option("--manifest", ev.manifest, "Manifest file or corpus directory")->required();
  c_ev->add_option("--split", ev.split, "train or heldout, when --manifest is a directory");
  c_ev->add_option("--seed", ev.seed, "Run seed")->capture_default_str();
  auto* o_p = c_ev->add_option("--p", ev_p, "Nucleus mass (default: from checkpoint config)");
  c_ev->add_flag("--oracle", ev.oracle, "Pass ground-truth codes through instead of decoding");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_dg->parsed()) {
      if (o_sent->count()) dg.sentences = dg_sentences;
      if (o_spk->count()) dg.speakers = dg_speakers;
      if (o_seed->count()) dg.seed = dg_seed;
      cmd_datagen(dg, out);
    } else if (c_tr->parsed()) {
      if (o_until->count()) tr.until = tr_until;
      cmd_train(tr, out);
    } else if (c_sy->parsed()) {
      cmd_synth(sy, out);
    } else if (c_al->parsed()) {
      cmd_align(al, out);
    } else if (c_ev->parsed()) {
      if (o_p->count()) ev.p = ev_p;
      cmd_eval(ev, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}

}  // namespace ttst
