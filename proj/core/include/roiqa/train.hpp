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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "roiqa/instructions.hpp"
#include "roiqa/metrics.hpp"
#include "roiqa/model.hpp"
#include "roiqa/types.hpp"

namespace roiqa {

struct LossWeights {
  double quality = 1.0;
  double importance = 1.0;
  double presence = 1.0;
  double severity = 1.0;
  double judgment = 1.0;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  double lr_floor = 0.0;       // cosine annealing floor
  std::size_t batch_size = 8;  // images per step; every ROI of an image joins its batch
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  double weight_decay = 0.0;
  bool freeze_encoder = false;
  LossWeights loss_weights;
  ModelConfig model;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

std::string train_config_to_json(const TrainConfig& config);
/// Missing keys keep defaults; unknown keys are rejected. "model" holds a
/// nested model config.
TrainConfig parse_train_config(std::string_view text);

/// Everything the heads are trained and scored against for one ROI.
struct RoiSample {
  std::string roi_id;
  RegionMask mask;
  std::vector<double> patch;  // prepared local-view input
  double quality = 0.0;       // human scale [0,4]
  double importance = 0.0;    // human scale [0,4]
  std::size_t quality_level = 0;
  std::size_t importance_level = 0;
  std::array<double, kDistortionTypeCount> presence{};
  std::array<std::size_t, kDistortionTypeCount> severity_level{};  // valid where present
  std::vector<std::pair<TaskQuery, bool>> judgments;
};

struct ImageSample {
  std::string distorted_path;
  std::vector<double> input;  // prepared encoder input
  std::vector<RoiSample> rois;
};

struct SampleSet {
  std::vector<ImageSample> images;
  std::size_t roi_count() const;
};

/// Reads the images of one split and joins them with their labels and
/// judgment instructions. When `instructions` is empty the judgments are
/// generated from the labels with `jir_seed`.
SampleSet load_samples(const DatasetManifest& manifest, const std::filesystem::path& dataset_dir,
                       const std::vector<RoiLabelRecord>& labels,
                       const std::vector<InstructionRecord>& instructions, Split split,
                       const ModelConfig& model, std::uint64_t jir_seed, std::size_t jobs);

/// Cached encoder features for one image (frozen-encoder training).
using FeatureCache = std::array<std::vector<double>, kEncoderLevels>;
FeatureCache encode_features(const MfeModel& model, const ImageSample& image);

/// Weighted sum of all head losses over the ROIs of one image.
nn::Graph::Var image_loss(const MfeModel& model, nn::Graph& g, const ImageSample& image,
                          const LossWeights& weights, const FeatureCache* cache = nullptr);

struct TrainResult {
  std::vector<double> epoch_loss;  // mean per-ROI loss of each epoch
  std::size_t steps = 0;
};

/// Called after each epoch; `epoch` counts from 1.
using ProgressFn = std::function<void(std::size_t epoch, double mean_loss)>;

/// Adam (0.9 / 0.999) with cosine-annealed rate. Throws Error with a
/// diagnostic if the loss becomes non-finite. Results do not depend on `jobs`.
TrainResult train(MfeModel& model, const SampleSet& data, const TrainConfig& config,
                  std::size_t jobs = 1, const ProgressFn& progress = {});

struct RoiPrediction {
  double quality = 0.0;     // closed-set score on [0,4]
  double importance = 0.0;  // closed-set score on [0,4]
  std::vector<std::size_t> types;                                // predicted present types
  std::vector<std::pair<std::size_t, std::size_t>> severities;   // (type, level) for present types
  std::size_t judgments_correct = 0;
  std::size_t judgments_total = 0;
};

RoiPrediction predict(const MfeModel& model, const ImageSample& image, const RoiSample& roi,
                      const FeatureCache* cache = nullptr);

struct TaskCorrelation {
  Correlation srocc;
  Correlation plcc;
};

struct EvalReport {
  std::size_t rois = 0;
  TaskCorrelation quality;
  TaskCorrelation importance;
  Prf severity;
  Prf distortion_type;
  // Per distortion type plus "clean"; empty when the class never occurs in
  // either ground truth or predictions.
  std::map<std::string, std::optional<double>> per_type_f1;
  double judgment_accuracy = 0.0;
};

/// Scores predictions against samples (same order).
EvalReport score_predictions(const std::vector<const RoiSample*>& truth,
                             const std::vector<RoiPrediction>& predictions);

EvalReport evaluate(const MfeModel& model, const SampleSet& data, std::size_t jobs = 1);

std::string eval_report_to_json(const EvalReport& report);

}  // namespace roiqa
