// Copyright 2026 The roiqa Authors
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

#include "roiqa/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "json_util.hpp"
#include "roiqa/image_io.hpp"
#include "roiqa/mask.hpp"
#include "roiqa/nn/optim.hpp"
#include "roiqa/parallel.hpp"
#include "roiqa/random.hpp"

namespace roiqa {

using detail::Json;
using nn::Graph;
using Var = nn::Graph::Var;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error("train config: learning_rate must be positive");
  }
  if (!(lr_floor >= 0.0) || lr_floor > learning_rate) {
    throw Error("train config: lr_floor must lie in [0, learning_rate]");
  }
  if (batch_size == 0) throw Error("train config: batch_size must be at least 1");
  if (epochs == 0) throw Error("train config: epochs must be at least 1");
  if (!(weight_decay >= 0.0)) throw Error("train config: weight_decay must be non-negative");
  const LossWeights& w = loss_weights;
  for (double v : {w.quality, w.importance, w.presence, w.severity, w.judgment}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("train config: loss weights must be >= 0");
  }
  if (w.quality + w.importance + w.presence + w.severity + w.judgment == 0.0) {
    throw Error("train config: all loss weights are zero");
  }
  model.validate();
}

std::string train_config_to_json(const TrainConfig& c) {
  Json j;
  j["learning_rate"] = c.learning_rate;
  j["lr_floor"] = c.lr_floor;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["weight_decay"] = c.weight_decay;
  j["freeze_encoder"] = c.freeze_encoder;
  j["loss_weights"] = {{"quality", c.loss_weights.quality},
                       {"importance", c.loss_weights.importance},
                       {"presence", c.loss_weights.presence},
                       {"severity", c.loss_weights.severity},
                       {"judgment", c.loss_weights.judgment}};
  j["model"] = Json::parse(model_config_to_json(c.model));
  return j.dump(2) + "\n";
}

TrainConfig parse_train_config(std::string_view text) {
  const Json j = detail::parse_json(text, "train config");
  if (!j.is_object()) throw Error("train config: expected a JSON object");
  static const std::set<std::string> known = {"learning_rate", "lr_floor",     "batch_size",
                                              "epochs",        "seed",         "weight_decay",
                                              "freeze_encoder", "loss_weights", "model"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw Error("train config: unknown key '" + key + "'");
  }
  TrainConfig c;
  auto opt = [](const Json& obj, const char* key, auto& field, const char* what) {
    if (obj.contains(key)) field = detail::require<std::decay_t<decltype(field)>>(obj, key, what);
  };
  opt(j, "learning_rate", c.learning_rate, "train config");
  opt(j, "lr_floor", c.lr_floor, "train config");
  opt(j, "batch_size", c.batch_size, "train config");
  opt(j, "epochs", c.epochs, "train config");
  opt(j, "seed", c.seed, "train config");
  opt(j, "weight_decay", c.weight_decay, "train config");
  opt(j, "freeze_encoder", c.freeze_encoder, "train config");
  if (j.contains("loss_weights")) {
    const Json& w = j.at("loss_weights");
    if (!w.is_object()) throw Error("train config: loss_weights must be an object");
    static const std::set<std::string> heads = {"quality", "importance", "presence", "severity",
                                                "judgment"};
    for (const auto& [key, _] : w.items()) {
      if (!heads.contains(key)) throw Error("train config: unknown loss weight '" + key + "'");
    }
    opt(w, "quality", c.loss_weights.quality, "loss_weights");
    opt(w, "importance", c.loss_weights.importance, "loss_weights");
    opt(w, "presence", c.loss_weights.presence, "loss_weights");
    opt(w, "severity", c.loss_weights.severity, "loss_weights");
    opt(w, "judgment", c.loss_weights.judgment, "loss_weights");
  }
  if (j.contains("model")) c.model = parse_model_config(j.at("model").dump());
  c.validate();
  return c;
}

std::size_t SampleSet::roi_count() const {
  std::size_t n = 0;
  for (const auto& im : images) n += im.rois.size();
  return n;
}

SampleSet load_samples(const DatasetManifest& manifest, const std::filesystem::path& dataset_dir,
                       const std::vector<RoiLabelRecord>& labels,
                       const std::vector<InstructionRecord>& instructions, Split split,
                       const ModelConfig& model, std::uint64_t jir_seed, std::size_t jobs) {
  std::map<std::string, const RoiLabelRecord*> by_roi;
  for (const auto& r : labels) by_roi[r.roi_id] = &r;
  std::map<std::string, std::vector<std::pair<TaskQuery, bool>>> judgments;
  for (const auto& ins : instructions) {
    if (!is_judgment(ins.kind)) continue;
    if (!ins.target.query || !ins.target.answer) {
      throw Error("instruction for '" + ins.roi_id + "' lacks a judgment target");
    }
    judgments[ins.roi_id].push_back({{ins.kind, *ins.target.query}, *ins.target.answer});
  }

  std::vector<const ManifestEntry*> selected;
  for (const auto& e : manifest.records) {
    if (!e.split) throw Error("manifest entry " + e.distorted_path + " has no split");
    if (*e.split == split && !e.roi_ids.empty()) selected.push_back(&e);
  }

  SampleSet out;
  out.images.resize(selected.size());
  parallel_for(selected.size(), static_cast<unsigned>(jobs), [&](std::size_t i) {
    const ManifestEntry& e = *selected[i];
    const ImageBuffer img = read_png(dataset_dir / e.distorted_path);
    ImageSample& s = out.images[i];
    s.distorted_path = e.distorted_path;
    s.input = prepare_image(img, model.input_size);
    for (const auto& roi_id : e.roi_ids) {
      const auto it = by_roi.find(roi_id);
      if (it == by_roi.end()) throw Error("no label record for ROI '" + roi_id + "'");
      const RoiLabelRecord& rec = *it->second;
      RoiSample r;
      r.roi_id = roi_id;
      r.mask = decode_mask(read_bytes(dataset_dir / rec.mask), MaskDims{img.height(), img.width()});
      r.patch = prepare_patch(img, r.mask, model.local_size);
      r.quality = rec.quality_score.to_human().value;
      r.importance = rec.importance_score.to_human().value;
      r.quality_level = quality_level(rec);
      r.importance_level = importance_level(rec);
      for (const auto& [type, level] : present_distortions(rec)) {
        r.presence[index_of(type)] = 1.0;
        r.severity_level[index_of(type)] = level;
      }
      if (const auto j = judgments.find(roi_id); j != judgments.end()) {
        r.judgments = j->second;
      } else {
        for (const auto& ins : gen_jir(rec, jir_seed)) {
          r.judgments.push_back({{ins.kind, *ins.target.query}, *ins.target.answer});
        }
      }
      s.rois.push_back(std::move(r));
    }
  });
  return out;
}

namespace {

std::array<Var, kEncoderLevels> features(const MfeModel& model, Graph& g, const ImageSample& image,
                                         const FeatureCache* cache) {
  const std::size_t S = model.config().input_size;
  if (!cache) return model.encode(g, g.constant({3, S, S}, image.input));
  std::array<Var, kEncoderLevels> f;
  for (std::size_t j = 0; j < kEncoderLevels; ++j) {
    const std::size_t side = S >> (j + 2);
    f[j] = g.constant({model.config().channels[j], side, side}, (*cache)[j]);
  }
  return f;
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

FeatureCache encode_features(const MfeModel& model, const ImageSample& image) {
  Graph g(false);
  const auto f = features(model, g, image, nullptr);
  FeatureCache out;
  for (std::size_t j = 0; j < kEncoderLevels; ++j) {
    const auto v = g.value(f[j]);
    out[j].assign(v.begin(), v.end());
  }
  return out;
}

Var image_loss(const MfeModel& model, Graph& g, const ImageSample& image, const LossWeights& w,
               const FeatureCache* cache) {
  if (image.rois.empty()) throw Error("image_loss: image has no ROIs");
  const std::size_t L = model.config().local_size;
  const auto feats = features(model, g, image, cache);
  std::vector<Var> terms;
  auto add = [&](Var loss, double weight) { terms.push_back(g.scale(loss, weight)); };
  for (const RoiSample& roi : image.rois) {
    const auto t = model.tokens(g, feats, g.constant({3, L, L}, roi.patch), roi.mask);
    if (w.quality > 0) {
      add(g.cross_entropy(model.head(g, t, Head::Quality, {InstructionKind::AirQuality, 0}), 0,
                          roi.quality_level),
          w.quality);
    }
    if (w.importance > 0) {
      add(g.cross_entropy(model.head(g, t, Head::Importance, {InstructionKind::AirImportance, 0}),
                          0, roi.importance_level),
          w.importance);
    }
    if (w.presence > 0) {
      add(g.bce_with_logits(model.head(g, t, Head::Presence, {InstructionKind::AirDistortion, 0}),
                            roi.presence),
          w.presence);
    }
    if (w.severity > 0 && std::any_of(roi.presence.begin(), roi.presence.end(),
                                      [](double p) { return p > 0.5; })) {
      const Var sev = model.head(g, t, Head::Severity, {InstructionKind::AirDistortion, 0});
      for (std::size_t k = 0; k < kDistortionTypeCount; ++k) {
        if (roi.presence[k] > 0.5) add(g.cross_entropy(sev, k, roi.severity_level[k]), w.severity);
      }
    }
    if (w.judgment > 0) {
      for (const auto& [query, answer] : roi.judgments) {
        add(g.cross_entropy(model.head(g, t, Head::Judgment, query), 0, answer ? 1 : 0),
            w.judgment);
      }
    }
  }
  return g.add_n(terms);
}

TrainResult train(MfeModel& model, const SampleSet& data, const TrainConfig& config,
                  std::size_t jobs, const ProgressFn& progress) {
  config.validate();
  if (data.images.empty() || data.roi_count() == 0) throw Error("train: empty training split");
  nn::ParameterSet& params = model.params();
  params.set_trainable("enc.", !config.freeze_encoder);

  std::vector<FeatureCache> caches;
  if (config.freeze_encoder) {
    caches.resize(data.images.size());
    parallel_for(data.images.size(), static_cast<unsigned>(jobs),
                 [&](std::size_t i) { caches[i] = encode_features(model, data.images[i]); });
  }

  nn::Adam adam(params, {0.9, 0.999, 1e-8, config.weight_decay});
  const std::size_t n = data.images.size();
  const std::size_t per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = per_epoch * config.epochs;

  TrainResult result;
  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_keys(config.seed, epoch));
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    std::size_t epoch_rois = 0;
    for (std::size_t b = 0; b < per_epoch; ++b) {
      const std::size_t lo = b * config.batch_size, hi = std::min(n, lo + config.batch_size);
      std::vector<nn::Gradients> grads(hi - lo);
      std::vector<double> losses(hi - lo);
      parallel_for(hi - lo, static_cast<unsigned>(jobs), [&](std::size_t k) {
        const std::size_t i = order[lo + k];
        Graph g;
        const Var loss = image_loss(model, g, data.images[i], config.loss_weights,
                                    config.freeze_encoder ? &caches[i] : nullptr);
        losses[k] = g.value(loss)[0];
        g.backward(loss);
        grads[k] = nn::Gradients(params);
        g.accumulate(grads[k]);
      });
      nn::Gradients total(params);
      double batch_loss = 0.0;
      std::size_t batch_rois = 0;
      for (std::size_t k = 0; k < grads.size(); ++k) {
        total.add(grads[k]);
        batch_loss += losses[k];
        batch_rois += data.images[order[lo + k]].rois.size();
      }
      if (!std::isfinite(batch_loss) || !std::isfinite(total.squared_norm())) {
        params.set_trainable("enc.", true);
        throw Error("training diverged: non-finite loss or gradient at epoch " +
                    std::to_string(epoch + 1) + ", step " + std::to_string(result.steps + 1));
      }
      total.scale(1.0 / static_cast<double>(batch_rois));
      adam.step(total, nn::cosine_lr(result.steps, total_steps, config.learning_rate,
                                     config.lr_floor));
      ++result.steps;
      epoch_loss += batch_loss;
      epoch_rois += batch_rois;
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(epoch_rois));
    if (progress) progress(epoch + 1, result.epoch_loss.back());
  }
  params.set_trainable("enc.", true);
  return result;
}

RoiPrediction predict(const MfeModel& model, const ImageSample& image, const RoiSample& roi,
                      const FeatureCache* cache) {
  Graph g(false);
  const std::size_t L = model.config().local_size;
  const auto feats = features(model, g, image, cache);
  const auto t = model.tokens(g, feats, g.constant({3, L, L}, roi.patch), roi.mask);
  RoiPrediction p;
  p.quality = closed_set_score(g.value(model.head(g, t, Head::Quality, {InstructionKind::AirQuality, 0})));
  p.importance = closed_set_score(
      g.value(model.head(g, t, Head::Importance, {InstructionKind::AirImportance, 0})));
  const auto presence =
      g.value(model.head(g, t, Head::Presence, {InstructionKind::AirDistortion, 0}));
  const auto severity =
      g.value(model.head(g, t, Head::Severity, {InstructionKind::AirDistortion, 0}));
  for (std::size_t k = 0; k < kDistortionTypeCount; ++k) {
    if (nn::sigmoid(presence[k]) > 0.5) {
      p.types.push_back(k);
      p.severities.push_back({k, argmax(severity.subspan(k * kLevelCount, kLevelCount))});
    }
  }
  for (const auto& [query, answer] : roi.judgments) {
    const auto logits = g.value(model.head(g, t, Head::Judgment, query));
    p.judgments_correct += ((logits[1] > logits[0]) == answer) ? 1 : 0;
    ++p.judgments_total;
  }
  return p;
}

EvalReport score_predictions(const std::vector<const RoiSample*>& truth,
                             const std::vector<RoiPrediction>& predictions) {
  if (truth.empty()) throw Error("evaluate: empty split");
  if (truth.size() != predictions.size()) throw Error("evaluate: prediction count mismatch");
  EvalReport r;
  r.rois = truth.size();
  std::vector<double> gq, pq, gi, pi;
  std::vector<Prf> sev, typ;
  std::array<std::size_t, kDistortionTypeCount + 1> tp{}, fp{}, fn{};
  std::size_t jc = 0, jt = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const RoiSample& t = *truth[i];
    const RoiPrediction& p = predictions[i];
    gq.push_back(t.quality);
    pq.push_back(p.quality);
    gi.push_back(t.importance);
    pi.push_back(p.importance);

    std::vector<std::size_t> gt_types, gt_sev, pred_sev;
    for (std::size_t k = 0; k < kDistortionTypeCount; ++k) {
      if (t.presence[k] > 0.5) {
        gt_types.push_back(k);
        gt_sev.push_back(k * kLevelCount + t.severity_level[k]);
      }
    }
    for (const auto& [k, level] : p.severities) pred_sev.push_back(k * kLevelCount + level);
    typ.push_back(sample_prf(gt_types, p.types));
    sev.push_back(sample_prf(gt_sev, pred_sev));

    for (std::size_t k = 0; k < kDistortionTypeCount; ++k) {
      const bool g = t.presence[k] > 0.5;
      const bool q = std::find(p.types.begin(), p.types.end(), k) != p.types.end();
      tp[k] += g && q;
      fp[k] += !g && q;
      fn[k] += g && !q;
    }
    const bool g_clean = gt_types.empty(), p_clean = p.types.empty();
    tp[kDistortionTypeCount] += g_clean && p_clean;
    fp[kDistortionTypeCount] += !g_clean && p_clean;
    fn[kDistortionTypeCount] += g_clean && !p_clean;
    jc += p.judgments_correct;
    jt += p.judgments_total;
  }
  auto corr = [](const std::vector<double>& pred, const std::vector<double>& gt) {
    if (gt.size() < 3) return TaskCorrelation{{0.0, true}, {0.0, true}};
    return TaskCorrelation{safe_srocc(pred, gt), safe_plcc(pred, gt)};
  };
  r.quality = corr(pq, gq);
  r.importance = corr(pi, gi);
  r.severity = average_prf(sev);
  r.distortion_type = average_prf(typ);
  for (std::size_t k = 0; k <= kDistortionTypeCount; ++k) {
    const std::string name =
        k < kDistortionTypeCount ? std::string(to_string(kAllDistortionTypes[k])) : "clean";
    const std::size_t denom = 2 * tp[k] + fp[k] + fn[k];
    r.per_type_f1[name] = denom == 0 ? std::nullopt
                                     : std::optional<double>(2.0 * static_cast<double>(tp[k]) /
                                                             static_cast<double>(denom));
  }
  r.judgment_accuracy = jt == 0 ? 0.0 : static_cast<double>(jc) / static_cast<double>(jt);
  return r;
}

EvalReport evaluate(const MfeModel& model, const SampleSet& data, std::size_t jobs) {
  std::vector<const RoiSample*> truth;
  std::vector<std::size_t> first(data.images.size());
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    first[i] = truth.size();
    for (const auto& roi : data.images[i].rois) truth.push_back(&roi);
  }
  if (truth.empty()) throw Error("evaluate: empty split");
  std::vector<RoiPrediction> preds(truth.size());
  parallel_for(data.images.size(), static_cast<unsigned>(jobs), [&](std::size_t i) {
    const ImageSample& image = data.images[i];
    const FeatureCache cache = encode_features(model, image);
    for (std::size_t k = 0; k < image.rois.size(); ++k) {
      preds[first[i] + k] = predict(model, image, image.rois[k], &cache);
    }
  });
  return score_predictions(truth, preds);
}

std::string eval_report_to_json(const EvalReport& r) {
  auto corr = [](const TaskCorrelation& c) {
    return Json{{"srocc", c.srocc.value},
                {"plcc", c.plcc.value},
                {"srocc_degenerate", c.srocc.degenerate},
                {"plcc_degenerate", c.plcc.degenerate}};
  };
  auto prf = [](const Prf& p) {
    return Json{{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
  };
  Json j;
  j["rois"] = r.rois;
  j["quality"] = corr(r.quality);
  j["importance"] = corr(r.importance);
  j["severity"] = prf(r.severity);
  j["distortion_type"] = prf(r.distortion_type);
  Json per = Json::object();
  for (DistortionType t : kAllDistortionTypes) {
    const auto& v = r.per_type_f1.at(std::string(to_string(t)));
    per[std::string(to_string(t))] = v ? Json(*v) : Json(nullptr);
  }
  const auto& clean = r.per_type_f1.at("clean");
  per["clean"] = clean ? Json(*clean) : Json(nullptr);
  j["per_type_f1"] = std::move(per);
  j["judgment_accuracy"] = r.judgment_accuracy;
  return j.dump(2) + "\n";
}

}  // namespace roiqa
