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


// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and workload sizes are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "roiqa/annotation.hpp"
#include "roiqa/distortion.hpp"
#include "roiqa/fr_oracle.hpp"
#include "roiqa/image_io.hpp"
#include "roiqa/instructions.hpp"
#include "roiqa/mask.hpp"
#include "roiqa/metrics.hpp"
#include "roiqa/model.hpp"
#include "roiqa/nn/graph.hpp"
#include "roiqa/nn/optim.hpp"
#include "roiqa/pipeline.hpp"
#include "roiqa/records.hpp"
#include "roiqa/scene.hpp"
#include "roiqa/train.hpp"
#include "test_util.hpp"

namespace roiqa {
namespace {

namespace fs = std::filesystem;
using nn::Graph;
using Var = Graph::Var;

constexpr double kOracleTolerance = 1e-10;
constexpr std::size_t kOracleInstances = 1000;
constexpr double kGradTolerance = 1e-4;
constexpr std::size_t kGradSeeds = 20;
constexpr std::size_t kDiscretizePairs = 10000;

// Training analog.
constexpr std::size_t kAblationScenes = 25;
constexpr std::size_t kAblationSceneSize = 64;
constexpr std::uint64_t kAblationSeed = 1;
constexpr std::size_t kAblationEpochs = 30;
constexpr double kAblationMinSrocc = 0.7;
constexpr double kAblationMinGap = 0.1;
constexpr double kAblationBudgetSeconds = 30 * 60;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Outcome oracle_equivalence() {
  Rng rng(2024);
  std::map<std::string, double> worst;
  for (std::size_t t = 0; t < kOracleInstances; ++t) {
    {  // mask_pool
      const std::size_t c = 1 + rng.index(4), fh = 1 + rng.index(8), fw = 1 + rng.index(8);
      const std::size_t h = fh * (1 + rng.index(5)) + rng.index(4), w = fw * (1 + rng.index(5)) + rng.index(4);
      const auto feat = testing::random_vector(rng, c * fh * fw);
      const RegionMask m = testing::random_mask(rng, h, w, rng.uniform(0.01, 0.9));
      worst["mask_pool"] = std::max(worst["mask_pool"], max_abs_diff(mask_pool(feat, c, fh, fw, m),
                                                                     oracle::mask_pool(feat, c, fh, fw, m)));
    }
    {  // conv2d
      const std::size_t c = 1 + rng.index(3), o = 1 + rng.index(3), h = 1 + rng.index(8), w = 1 + rng.index(8);
      const std::size_t k = 1 + 2 * rng.index(3), stride = 1 + rng.index(2);
      const bool reflect = rng.bernoulli(0.5) && h > k / 2 && w > k / 2;
      const auto x = testing::random_vector(rng, c * h * w);
      const auto ker = testing::random_vector(rng, o * c * k * k);
      const auto b = testing::random_vector(rng, o);
      Graph g(false);
      const Var y = g.conv2d(g.constant({c, h, w}, x), g.constant({o, c, k, k}, ker), g.constant({o}, b), stride,
                             reflect ? nn::Padding::Reflect : nn::Padding::Zero);
      worst["conv2d"] = std::max(worst["conv2d"],
                                 max_abs_diff(g.value(y), oracle::conv2d(x, c, h, w, ker, o, k, b, stride, reflect)));
    }
    {  // attention
      const std::size_t n = 1 + rng.index(4), m = 1 + rng.index(6), p = 1 + rng.index(8);
      const auto q = testing::random_vector(rng, n * p), k = testing::random_vector(rng, m * p),
                 v = testing::random_vector(rng, m * p);
      Graph g(false);
      const Var y = g.attention(g.constant({n, p}, q), g.constant({m, p}, k), g.constant({m, p}, v));
      worst["attention"] = std::max(worst["attention"], max_abs_diff(g.value(y), oracle::attention(q, k, v, n, m, p)));
    }
    {  // srocc / plcc, with ties half of the time
      const std::size_t n = 3 + rng.index(40);
      auto x = testing::random_vector(rng, n), y = testing::random_vector(rng, n);
      if (t % 2) {
        for (double& v : x) v = std::round(v * 3);
        for (double& v : y) v = std::round(v * 3);
      }
      if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) x[0] += 1;
      if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) y[0] += 1;
      worst["srocc"] = std::max(worst["srocc"], std::abs(srocc(x, y) - oracle::spearman(x, y)));
      worst["plcc"] = std::max(worst["plcc"], std::abs(plcc(x, y) - oracle::pearson(x, y)));
    }
    {  // closed_set_score
      const auto l = testing::random_vector(rng, 5, -30, 30);
      worst["closed_set_score"] =
          std::max(worst["closed_set_score"], std::abs(closed_set_score(l) - oracle::closed_set_score(l)));
    }
  }
  Outcome o{true, std::to_string(kOracleInstances) + " instances each; max abs error"};
  for (const auto& [name, e] : worst) {
    o.pass = o.pass && e <= kOracleTolerance;
    o.detail += " " + name + "=" + fmt("%.2e", e);
  }
  return o;
}

ModelConfig grad_model() {
  ModelConfig c;
  c.input_size = 32;
  c.token_dim = 8;
  c.channels = {4, 4, 6, 6};
  c.local_channels = 4;
  c.local_size = 8;
  c.head_hidden = 8;
  return c;
}

Outcome gradient_integrity() {
  double worst = 0.0;
  std::size_t checked = 0;
  std::string where;
  for (std::uint64_t seed = 0; seed < kGradSeeds; ++seed) {
    const ModelConfig cfg = grad_model();
    MfeModel model(cfg, 500 + seed);
    Rng rng(900 + seed);
    const ImageBuffer img = testing::random_image(rng, 40, 40);
    const RegionMask mask = testing::random_mask(rng, 40, 40, rng.uniform(0.05, 0.4));
    const auto input = prepare_image(img, cfg.input_size);
    const auto patch = prepare_patch(img, mask, cfg.local_size);
    const std::size_t level = rng.index(5), type = rng.index(kDistortionTypeCount);
    const std::vector<double> presence = testing::random_vector(rng, kDistortionTypeCount, 0, 1);
    const auto loss = [&](Graph& g) {
      const auto feats = model.encode(g, g.constant({3, cfg.input_size, cfg.input_size}, input));
      const auto t = model.tokens(g, feats, g.constant({3, cfg.local_size, cfg.local_size}, patch), mask);
      const std::array<Var, 5> terms{
          g.cross_entropy(model.head(g, t, Head::Quality, {InstructionKind::AirQuality, 0}), 0, level),
          g.cross_entropy(model.head(g, t, Head::Importance, {InstructionKind::AirImportance, 0}), 0, 4 - level),
          g.bce_with_logits(model.head(g, t, Head::Presence, {InstructionKind::AirDistortion, 0}), presence),
          g.cross_entropy(model.head(g, t, Head::Severity, {InstructionKind::AirDistortion, 0}), type, level),
          g.cross_entropy(model.head(g, t, Head::Judgment, {InstructionKind::JirQuality, level}), 0, seed % 2)};
      return g.add_n(terms);
    };
    nn::GradCheckOptions opt;
    opt.max_elements_per_param = 6;
    opt.seed = seed + 1;
    opt.order = 4;
    opt.eps = 1e-3;
    const auto r = nn::grad_check(loss, model.params(), opt);
    checked += r.checked;
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      where = "seed " + std::to_string(seed) + " " + r.worst;
    }
  }
  return {worst < kGradTolerance, std::to_string(kGradSeeds) + " seeds, " + std::to_string(checked) +
                                      " elements; max rel error " + fmt("%.2e", worst) + " at " + where};
}

Outcome discretizer() {
  Rng rng(77);
  std::size_t mismatches = 0, boundaries = 0;
  for (std::size_t i = 0; i < kDiscretizePairs; ++i) {
    const double m = rng.bernoulli(0.5) ? (rng.bernoulli(0.5) ? 1.0 : 4.0) : rng.uniform(0.05, 20.0);
    double s;
    if (rng.bernoulli(0.3)) {
      const std::size_t k = rng.index(6);
      s = k == 5 ? m : m * static_cast<double>(k) / 5.0;
      ++boundaries;
    } else {
      s = rng.uniform(0.0, m);
    }
    if (discretize(s, LevelScale::quality(m)).index != oracle::discretize(s, m)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(kDiscretizePairs) + " pairs (" + std::to_string(boundaries) +
                               " on bin edges), " + std::to_string(mismatches) + " mismatches"};
}

Outcome labeling_semantics() {
  testing::TempDir dir("accept-label");
  fs::create_directories(dir / "refs");
  for (const auto& p : testing::fixture_paths()) fs::copy_file(p, dir / "refs" / p.filename());
  SynthOptions so;
  so.families = {DistortionType::Noise, DistortionType::Blur};
  so.seed = 7;
  DatasetManifest m = synth_dataset(dir / "refs", dir / "ds", so);
  MaskProposalOptions mo;
  mo.seed = 11;
  m = propose_dataset_masks(m, dir / "ds", mo);
  const auto labels = label_dataset(m, dir / "ds", LabelOptions{});

  // Identity replacement: exact zero importance.
  std::size_t identity_checked = 0, identity_bad = 0;
  for (const auto& e : m.records) {
    if (e.parameter_index != 0 || e.distortion_type != DistortionType::Noise) continue;
    const ImageBuffer ref = read_png(dir / "ds" / e.reference_path);
    for (std::size_t k = 0; k < e.roi_ids.size(); ++k) {
      const RegionMask mask = decode_mask(read_bytes(dir / "ds" / mask_path_for(e.image_id, k)));
      const auto r = label_roi(ref, ref, mask, e, e.roi_ids[k], mask_path_for(e.image_id, k));
      ++identity_checked;
      if (r.importance_score.value != 0.0) ++identity_bad;
    }
  }

  // Clean threshold: above 0.92 the AIR distortion answer is "without distortions".
  std::size_t clean = 0, threshold_bad = 0;
  for (const auto& r : labels) {
    const bool any = std::any_of(r.distortions.begin(), r.distortions.end(), [](const auto& d) { return d.present; });
    const auto airs = gen_air(r);
    const auto it = std::find_if(airs.begin(), airs.end(), [](const auto& a) { return a.kind == InstructionKind::AirDistortion; });
    const bool says_clean = it != airs.end() && it->response == "Without distortions";
    const bool should_be_clean = r.quality_score.value > kCleanThreshold;
    clean += should_be_clean;
    if (any == should_be_clean || says_clean != should_be_clean) ++threshold_bad;
  }

  // fr_score non-increasing across the 20 levels, every fixture.
  std::size_t violations = 0, series = 0;
  for (const auto& p : testing::fixture_paths()) {
    const ImageBuffer ref = read_png(p);
    const std::string id = sha256_hex(read_bytes(p));
    for (DistortionType t : {DistortionType::Noise, DistortionType::Blur}) {
      ++series;
      double prev = INFINITY;
      for (std::size_t level = 0; level < kLevelsPerFamily; ++level) {
        const ImageBuffer d = quantize_8bit(apply_distortion(ref, DistortionSpec::at_level(t, level, 7), id));
        const double s = fr_score(d, ref);
        if (s > prev) ++violations;
        prev = s;
      }
    }
  }
  const bool pass = identity_bad == 0 && identity_checked > 0 && threshold_bad == 0 && violations == 0;
  return {pass, "identity " + std::to_string(identity_checked) + " ROIs/" + std::to_string(identity_bad) +
                    " nonzero; threshold " + std::to_string(labels.size()) + " ROIs (" + std::to_string(clean) +
                    " clean)/" + std::to_string(threshold_bad) + " wrong; monotonicity " + std::to_string(series) +
                    " series/" + std::to_string(violations) + " violations"};
}

RatingRecord scripted(const std::string& roi, std::size_t who, int q, int imp, std::array<int, 6> d) {
  RatingRecord r;
  r.roi_id = roi;
  r.annotator_id = "rater" + std::to_string(who);
  r.quality = q;
  r.importance = imp;
  r.distortions = d;
  r.timestamp = "2026-01-01T00:00:0" + std::to_string(who) + ".000Z";
  return r;
}

Outcome aggregation_protocol() {
  struct Case {
    std::vector<RatingRecord> ratings;
    AggregatedLabel expected;
  };
  std::vector<Case> cases;
  auto base = [](const std::string& roi, std::size_t n) {
    AggregatedLabel a;
    a.roi_id = roi;
    a.rater_count = n;
    a.finalized = n >= kFinalizeRaters;
    for (std::size_t k = 0; k < kDistortionTypeCount; ++k) {
      a.distortions[k].type = kAllDistortionTypes[k];
      a.distortions[k].nonexistent_votes = n;
    }
    return a;
  };
  {  // 4 of 7 say non-existent: absent.
    Case c;
    const std::array<int, 7> noise = {5, 5, 5, 5, 0, 1, 2};
    for (std::size_t i = 0; i < 7; ++i) c.ratings.push_back(scripted("roiA", i, 2, 3, {5, noise[i], 5, 5, 5, 5}));
    c.expected = base("roiA", 7);
    c.expected.quality_mean = 2.0;
    c.expected.quality_level = 2;
    c.expected.importance_mean = 3.0;
    c.expected.importance_level = 3;
    c.expected.distortions[1].nonexistent_votes = 4;
    cases.push_back(c);
  }
  {  // 3 of 7 say non-existent: present, severity = mean of the other four.
    Case c;
    const std::array<int, 7> blur = {5, 5, 5, 0, 1, 1, 2};
    const std::array<int, 7> q = {0, 1, 1, 1, 0, 1, 0};
    for (std::size_t i = 0; i < 7; ++i) c.ratings.push_back(scripted("roiB", i, q[i], 4, {5, 5, blur[i], 5, 5, 5}));
    c.expected = base("roiB", 7);
    c.expected.quality_mean = 4.0 / 7.0;
    c.expected.quality_level = 0;
    c.expected.importance_mean = 4.0;
    c.expected.importance_level = 4;
    auto& d = c.expected.distortions[2];
    d.nonexistent_votes = 3;
    d.present = true;
    d.mean_severity = 1.0;
    d.severity_level = 1;
    cases.push_back(c);
  }
  {  // Two distortions present, one unanimous; severity on an exact bin edge.
    Case c;
    const std::array<int, 7> expo = {4, 4, 4, 4, 4, 4, 4};
    const std::array<int, 7> comp = {2, 2, 1, 1, 1, 1, 5};
    for (std::size_t i = 0; i < 7; ++i)
      c.ratings.push_back(scripted("roiC", i, 3, static_cast<int>(i % 2), {expo[i], 5, 5, 5, 5, comp[i]}));
    c.expected = base("roiC", 7);
    c.expected.quality_mean = 3.0;
    c.expected.quality_level = 3;
    c.expected.importance_mean = 3.0 / 7.0;
    c.expected.importance_level = 0;
    auto& e = c.expected.distortions[0];
    e.nonexistent_votes = 0;
    e.present = true;
    e.mean_severity = 4.0;
    e.severity_level = 4;
    auto& k = c.expected.distortions[5];
    k.nonexistent_votes = 1;
    k.present = true;
    k.mean_severity = 8.0 / 6.0;
    k.severity_level = 1;
    cases.push_back(c);
  }
  std::size_t wrong = 0;
  for (const auto& c : cases) {
    if (finalize_roi(c.ratings) != c.expected) ++wrong;
    auto shuffled = c.ratings;
    std::reverse(shuffled.begin(), shuffled.end());
    if (aggregate_roi(shuffled) != c.expected) ++wrong;
  }

  // Store + log replay.
  testing::TempDir dir("accept-agg");
  std::vector<RoiInfo> rois;
  for (const char* id : {"roiA", "roiB", "roiC", "roiD"}) {
    RoiInfo info;
    info.roi_id = id;
    info.image_id = "img";
    info.mask_path = std::string("masks/img_") + id + ".json";
    rois.push_back(info);
  }
  std::vector<std::string> annotators;
  for (std::size_t i = 0; i < 9; ++i) annotators.push_back("rater" + std::to_string(i));
  std::string before_labels, before_ratings, before_aggs;
  std::size_t replay_bad = 0;
  auto dump = [&](const AnnotationStore& s, std::string& labels, std::string& ratings, std::string& aggs) {
    for (const auto& l : s.export_labels()) labels += roi_label_to_json(l) + "\n";
    for (const auto& r : s.ratings()) ratings += rating_to_json(r) + "\n";
    for (const auto& info : rois) aggs += aggregated_to_json(s.aggregate(info.roi_id));
  };
  {
    AnnotationStore store(rois, annotators, dir / "log.jsonl");
    for (const auto& c : cases)
      for (const auto& r : c.ratings) store.submit(r);
    Rng rng(5);
    for (int i = 0; i < 30; ++i) {
      auto r = scripted("roiD", rng.index(6), static_cast<int>(rng.index(5)), static_cast<int>(rng.index(5)),
                        {static_cast<int>(rng.index(6)), 5, 5, 5, 5, 5});
      r.timestamp.clear();
      store.submit(r);
    }
    for (const auto& c : cases)
      if (to_label_record(c.expected, "img", "masks/img_" + c.expected.roi_id + ".json", MaskLevel::Component) !=
          to_label_record(store.aggregate(c.expected.roi_id), "img", "masks/img_" + c.expected.roi_id + ".json",
                          MaskLevel::Component))
        ++wrong;
    dump(store, before_labels, before_ratings, before_aggs);
  }
  AnnotationStore replayed(rois, annotators, dir / "log.jsonl");
  std::string after_labels, after_ratings, after_aggs;
  dump(replayed, after_labels, after_ratings, after_aggs);
  if (after_labels != before_labels || after_ratings != before_ratings || after_aggs != before_aggs) ++replay_bad;
  return {wrong == 0 && replay_bad == 0,
          std::to_string(cases.size()) + " scripted 7-rater ROIs, " + std::to_string(wrong) + " mismatches; replay " +
              (replay_bad ? "differs" : "bit-exact") + " over " + std::to_string(read_lines(dir / "log.jsonl").size()) +
              " logged events"};
}

Outcome training_ablation() {
  const auto t0 = std::chrono::steady_clock::now();
  testing::TempDir dir("accept-train");
  fs::create_directories(dir / "refs");
  for (std::size_t i = 0; i < kAblationScenes; ++i) {
    write_png(dir / "refs" / ("scene_" + std::to_string(100 + i) + ".png"),
              procedural_scene(1000 + i, kAblationSceneSize, kAblationSceneSize));
  }
  SynthOptions so;
  so.families = {DistortionType::Noise, DistortionType::Blur};
  so.seed = 7;
  DatasetManifest m = synth_dataset(dir / "refs", dir / "ds", so);
  MaskProposalOptions mo;
  mo.seed = 11;
  m = propose_dataset_masks(m, dir / "ds", mo);
  const auto labels = label_dataset(m, dir / "ds", LabelOptions{});
  auto [train_part, test_part] = split_dataset(m, 0.8, 3);
  DatasetManifest tagged = train_part;
  tagged.records.insert(tagged.records.end(), test_part.records.begin(), test_part.records.end());

  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.lr_floor = 1e-5;
  cfg.batch_size = 8;
  cfg.epochs = kAblationEpochs;
  cfg.seed = kAblationSeed;
  const auto train_set = load_samples(tagged, dir / "ds", labels, {}, Split::Train, cfg.model, 5, 1);
  const auto test_set = load_samples(tagged, dir / "ds", labels, {}, Split::Test, cfg.model, 5, 1);

  double full = 0.0, ablated = 0.0;
  for (bool use_global : {true, false}) {
    TrainConfig c = cfg;
    c.model.use_global = use_global;
    MfeModel model(c.model, c.seed);
    train(model, train_set, c);
    const double s = evaluate(model, test_set).quality.srocc.value;
    (use_global ? full : ablated) = s;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = full >= kAblationMinSrocc && full - ablated >= kAblationMinGap && seconds <= kAblationBudgetSeconds;
  return {pass, std::to_string(m.records.size()) + " images (" + std::to_string(train_set.roi_count()) + " train / " +
                    std::to_string(test_set.roi_count()) + " test ROIs); quality SROCC full " + fmt("%.4f", full) +
                    ", w/o global " + fmt("%.4f", ablated) + ", gap " + fmt("%.4f", full - ablated) + " (need >= " +
                    fmt("%.2f", kAblationMinGap) + " and full >= " + fmt("%.2f", kAblationMinSrocc) + "); " +
                    fmt("%.0f s", seconds)};
}

Outcome determinism() {
  testing::TempDir dir("accept-det");
  fs::create_directories(dir / "refs");
  const auto fixtures = testing::fixture_paths();
  for (std::size_t i = 0; i < 2; ++i) fs::copy_file(fixtures[i], dir / "refs" / fixtures[i].filename());
  write_file_atomic(dir / "train.json",
                    R"({"learning_rate": 1e-3, "batch_size": 8, "epochs": 1, "seed": 3,)"
                    R"( "model": {"channels": [8, 8, 16, 16], "token_dim": 16, "head_hidden": 16}})");
  const std::string cli = std::string("'") + ROIQA_CLI_PATH + "'";
  auto run = [&](const std::string& tag, unsigned jobs) {
    const fs::path out = dir / tag;
    const std::string q = "'" + out.string() + "'";
    const std::string j = " -j " + std::to_string(jobs) + " ";
    const std::vector<std::string> steps = {
        "synth --ref-dir '" + (dir / "refs").string() + "' --out-dir " + q + " --families noise,blur --seed 5",
        "masks --data " + q + "/manifest.jsonl --seed 6",
        "label --data " + q + "/manifest.jsonl --out " + q + "/labels.jsonl",
        "instruct --labels " + q + "/labels.jsonl --out " + q + "/instructions.jsonl --mode random --seed 8",
        "split --data " + q + "/manifest.jsonl --out " + q + "/split.jsonl --seed 9",
        "train --config '" + (dir / "train.json").string() + "' --data " + q + "/split.jsonl --labels " + q +
            "/labels.jsonl --instructions " + q + "/instructions.jsonl --out " + q + "/ckpt",
        "eval --ckpt " + q + "/ckpt --data " + q + "/split.jsonl --labels " + q + "/labels.jsonl --instructions " +
            q + "/instructions.jsonl --report " + q + "/report.json"};
    for (const auto& s : steps) {
      const auto r = testing::run_command(cli + j + s + " 2>/dev/null");
      if (r.exit_code != 0) throw Error("step failed: " + s);
    }
    return testing::snapshot_tree(out);
  };
  const auto a = run("run1", 1);
  const auto b = run("run2", 1);
  const auto c = run("run3", 4);
  std::size_t differing = 0;
  for (const auto& [path, bytes] : a) {
    const auto ib = b.find(path), ic = c.find(path);
    if (ib == b.end() || ib->second != bytes || ic == c.end() || ic->second != bytes) ++differing;
  }
  const bool pass = differing == 0 && a.size() == b.size() && a.size() == c.size() && a.contains("report.json") &&
                    a.contains("ckpt/model.ckpt");
  return {pass, std::to_string(a.size()) + " artifacts compared over 3 runs (jobs 1, 1, 4); " +
                    std::to_string(differing) + " differ"};
}

}  // namespace
}  // namespace roiqa

int main(int argc, char** argv) {
  using namespace roiqa;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle-equivalence", oracle_equivalence},     {"gradient-integrity", gradient_integrity},
      {"discretizer", discretizer},                   {"labeling-semantics", labeling_semantics},
      {"aggregation-protocol", aggregation_protocol}, {"training-ablation", training_ablation},
      {"determinism", determinism},
  };
  // Optional arguments select criteria by name; ctest runs them all.
  const std::vector<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  std::size_t ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(ran) - failures, ran);
  return failures == 0 ? 0 : 1;
}
