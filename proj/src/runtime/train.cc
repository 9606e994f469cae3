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

#include "ttst/runtime/train.h"

#include <cmath>
#include <map>
#include <numeric>

#include "ttst/common/errors.h"
#include "ttst/numerics/rng.h"

namespace ttst {

void TrainConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("train.alpha must be in [0, 1]");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (total_steps < 0) throw ConfigError("train.total_steps must be >= 0");
  if (!(grad_clip > 0.0)) throw ConfigError("train.grad_clip must be positive");
  if (weight_decay < 0.0) throw ConfigError("train.weight_decay must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be >= 0");
  if (reference != "target" && reference != "speaker") {
    throw ConfigError("train.reference must be \"target\" or \"speaker\"");
  }
  schedule.validate();
}

Json to_json(const TrainConfig& c) {
  return Json{{"alpha", c.alpha},
              {"batch_size", c.batch_size},
              {"total_steps", c.total_steps},
              {"warmup_steps", c.schedule.warmup_steps},
              {"max_lr", c.schedule.max_lr},
              {"min_lr", c.schedule.min_lr},
              {"schedule_steps", c.schedule.total_steps},
              {"grad_clip", c.grad_clip},
              {"weight_decay", c.weight_decay},
              {"seed", c.seed},
              {"checkpoint_every", c.checkpoint_every},
              {"reference", c.reference}};
}

void from_json(const Json& j, TrainConfig& c, const std::string& where) {
  require_keys(j,
               {"alpha", "batch_size", "total_steps", "warmup_steps", "max_lr", "min_lr",
                "schedule_steps", "grad_clip", "weight_decay", "seed", "checkpoint_every",
                "reference"},
               where);
  read_opt(j, "alpha", c.alpha, where);
  read_opt(j, "batch_size", c.batch_size, where);
  read_opt(j, "total_steps", c.total_steps, where);
  read_opt(j, "warmup_steps", c.schedule.warmup_steps, where);
  read_opt(j, "max_lr", c.schedule.max_lr, where);
  read_opt(j, "min_lr", c.schedule.min_lr, where);
  c.schedule.total_steps = c.total_steps;
  read_opt(j, "schedule_steps", c.schedule.total_steps, where);
  read_opt(j, "grad_clip", c.grad_clip, where);
  read_opt(j, "weight_decay", c.weight_decay, where);
  read_opt(j, "seed", c.seed, where);
  read_opt(j, "checkpoint_every", c.checkpoint_every, where);
  read_opt(j, "reference", c.reference, where);
}

std::vector<TrainItem> make_train_items(const std::vector<Utterance>& utterances,
                                        const std::string& reference) {
  std::map<std::string, std::shared_ptr<const FeatureSeq>> refs;
  std::vector<TrainItem> items;
  items.reserve(utterances.size());
  for (const auto& u : utterances) {
    if (reference == "target") {
      if (u.features.rows() == 0) throw IoError("no ground-truth features for " + u.entry.id);
      items.push_back(
          TrainItem{u.entry.id, u.tokens.ids, u.codes, std::make_shared<const FeatureSeq>(u.features)});
      continue;
    }
    if (reference != "speaker") throw ConfigError("unknown reference mode: " + reference);
    auto& ref = refs[u.entry.ref];
    if (!ref) ref = std::make_shared<const FeatureSeq>(u.ref);
    items.push_back(TrainItem{u.entry.id, u.tokens.ids, u.codes, ref});
  }
  return items;
}

template <typename T>
Var rnnt_node(Graph<T>& g, Var logits, int positions, std::span<const int> target,
              AlignmentPath* alignment) {
  const int frames = static_cast<int>(target.size());
  if (!g.value(logits).allFinite()) throw NumericalError("joint logits are not finite");
  auto grid = std::make_shared<JointLogProbGrid>(
      JointLogProbGrid::from_logits(positions, frames, g.value(logits).template cast<double>()));
  auto tgt = std::make_shared<std::vector<int>>(target.begin(), target.end());
  auto result = std::make_shared<RnntResult>(rnnt_loss(*grid, *tgt));
  if (!std::isfinite(result->loss)) {
    throw NumericalError("transducer loss is not finite (" + std::to_string(result->loss) + ")");
  }
  if (alignment != nullptr) *alignment = best_path(*grid, *tgt);
  Mat<T> value(1, 1);
  value(0, 0) = static_cast<T>(result->loss);
  return g.custom(std::move(value), [logits, grid, tgt, result](Graph<T>& gr, const Mat<T>& dy) {
    const Mat<double> d = rnnt_grad(*grid, *tgt, result->lattice);
    gr.accumulate_grad(logits, (d * static_cast<double>(dy(0, 0))).template cast<T>());
  });
}

template <typename T>
LossGraph<T> build_loss(const TtsModel<T>& model, Graph<T>& g, std::span<const TrainItem> batch,
                        double alpha, std::span<const int> levels) {
  if (batch.empty()) throw ValidationError("train: empty batch");
  if (levels.size() != batch.size()) throw ValidationError("train: one level per item required");
  const int books = model.config().num_codebooks;
  LossGraph<T> out;
  out.breakdown.levels.assign(levels.begin(), levels.end());
  std::map<const FeatureSeq*, Var> speakers;
  Var rnnt_sum, ce_sum;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const TrainItem& item = batch[b];
    if (item.codes.books() != books) {
      throw ValidationError(item.id + ": code grid has " + std::to_string(item.codes.books()) +
                            " columns, model expects " + std::to_string(books));
    }
    if (!item.ref) throw ValidationError(item.id + ": missing reference");
    Var& s = speakers[item.ref.get()];
    if (!s.valid()) s = model.speaker(g, item.ref->template cast<T>());
    Var enc = model.encode(g, item.tokens, s);
    const std::vector<int> col0 = item.codes.column(0);
    Var pred = model.predict(g, col0);
    Var logits = model.joint_logits(g, enc, pred);
    AlignmentPath path;
    Var rl = rnnt_node(g, logits, static_cast<int>(item.tokens.size()), col0, &path);
    Var rch = model.rch_logits(g, item.codes, levels[b], path.frame_to_pos, enc, s);
    Var ce = g.cross_entropy(rch, item.codes.column(levels[b]));
    rnnt_sum = rnnt_sum.valid() ? g.add(rnnt_sum, rl) : rl;
    ce_sum = ce_sum.valid() ? g.add(ce_sum, ce) : ce;
    out.alignments.push_back(std::move(path));
  }
  const T inv = T(1) / static_cast<T>(batch.size());
  out.rnnt = g.scale(rnnt_sum, inv);
  out.ce = g.scale(ce_sum, inv);
  out.total = g.add(g.scale(out.rnnt, static_cast<T>(1.0 - alpha)),
                    g.scale(out.ce, static_cast<T>(alpha)));
  out.breakdown.rnnt = static_cast<double>(g.value(out.rnnt)(0, 0));
  out.breakdown.ce = static_cast<double>(g.value(out.ce)(0, 0));
  out.breakdown.total = static_cast<double>(g.value(out.total)(0, 0));
  return out;
}

Trainer::Trainer(TtsModel<float>& model, const TrainConfig& config, std::vector<TrainItem> data)
    : model_(model),
      config_(config),
      data_(std::move(data)),
      optimizer_(model.params(), AdamWOptions{0.9, 0.98, 1e-8, config.weight_decay}) {
  config_.validate();
  if (data_.empty()) throw ValidationError("train: no training data");
}

std::vector<std::size_t> Trainer::batch_indices(std::int64_t step) {
  const auto n = static_cast<std::int64_t>(data_.size());
  std::vector<std::size_t> idx;
  for (int b = 0; b < config_.batch_size; ++b) {
    const std::int64_t e = step * config_.batch_size + b;
    const std::int64_t epoch = e / n;
    if (epoch != perm_epoch_) {
      perm_.resize(data_.size());
      std::iota(perm_.begin(), perm_.end(), std::size_t{0});
      Rng rng(mix_seed(mix_seed(config_.seed, 0x65706f6368ULL), static_cast<std::uint64_t>(epoch)));
      for (std::size_t i = perm_.size(); i > 1; --i) {
        std::swap(perm_[i - 1], perm_[static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(i)))]);
      }
      perm_epoch_ = epoch;
    }
    idx.push_back(perm_[static_cast<std::size_t>(e % n)]);
  }
  return idx;
}

std::vector<int> Trainer::batch_levels(std::int64_t step) const {
  Rng rng(mix_seed(mix_seed(config_.seed, 0x6c6576656cULL), static_cast<std::uint64_t>(step)));
  const int residual = model_.config().num_codebooks - 1;
  std::vector<int> levels;
  for (int b = 0; b < config_.batch_size; ++b) {
    levels.push_back(1 + static_cast<int>(rng.below(residual)));
  }
  return levels;
}

StepResult Trainer::step() {
  const std::int64_t s = step_;
  const auto idx = batch_indices(s);
  const auto levels = batch_levels(s);
  std::vector<TrainItem> batch;
  batch.reserve(idx.size());
  for (auto i : idx) batch.push_back(data_[i]);

  StepResult res;
  res.step = s + 1;
  model_.params().zero_grad();
  try {
    Graph<float> g(true);
    LossGraph<float> lg = build_loss(model_, g, batch, config_.alpha, levels);
    res.loss = lg.breakdown;
    if (!std::isfinite(res.loss.total)) {
      throw NumericalError("non-finite loss (rnnt " + std::to_string(res.loss.rnnt) + ", ce " +
                           std::to_string(res.loss.ce) + ")");
    }
    g.backward(lg.total);
    res.grad_norm = clip_grad_norm(model_.params(), config_.grad_clip);
    res.lr = lr_at(config_.schedule, res.step);
    optimizer_.step(res.lr);
  } catch (const NumericalError& e) {
    throw NumericalError("step " + std::to_string(res.step) + ": " + e.what());
  }
  step_ = res.step;
  return res;
}

void Trainer::save_state(Checkpoint& ckpt) const {
  ckpt.meta["step"] = step_;
  ckpt.meta["optimizer_steps"] = optimizer_.step_count();
  const auto& params = model_.params().params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    ckpt.records.push_back(to_record("optim.m/" + params[i]->name, optimizer_.first_moments()[i]));
    ckpt.records.push_back(to_record("optim.v/" + params[i]->name, optimizer_.second_moments()[i]));
  }
}

void Trainer::restore_state(const Checkpoint& ckpt) {
  if (!ckpt.meta.contains("step") || !ckpt.meta.contains("optimizer_steps")) {
    throw ValidationError("checkpoint has no training state");
  }
  const auto& params = model_.params().params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = *params[i];
    const TensorRecord* m = ckpt.find("optim.m/" + p.name);
    const TensorRecord* v = ckpt.find("optim.v/" + p.name);
    if (m == nullptr || v == nullptr) {
      throw ValidationError("checkpoint is missing optimizer state for " + p.name);
    }
    optimizer_.first_moments()[i] = from_record<float>(*m, p.value.rows(), p.value.cols());
    optimizer_.second_moments()[i] = from_record<float>(*v, p.value.rows(), p.value.cols());
  }
  optimizer_.set_step_count(ckpt.meta["optimizer_steps"].get<std::int64_t>());
  step_ = ckpt.meta["step"].get<std::int64_t>();
  perm_epoch_ = -1;
}

template Var rnnt_node<float>(Graph<float>&, Var, int, std::span<const int>, AlignmentPath*);
template Var rnnt_node<double>(Graph<double>&, Var, int, std::span<const int>, AlignmentPath*);
template LossGraph<float> build_loss<float>(const TtsModel<float>&, Graph<float>&,
                                            std::span<const TrainItem>, double,
                                            std::span<const int>);
template LossGraph<double> build_loss<double>(const TtsModel<double>&, Graph<double>&,
                                              std::span<const TrainItem>, double,
                                              std::span<const int>);

}  // namespace ttst
