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


#include "commands.hpp"

#include <pthread.h>

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <map>
#include <thread>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "pipeline_config.hpp"
#include "roiqa/annotation.hpp"
#include "roiqa/distortion.hpp"
#include "roiqa/instructions.hpp"
#include "roiqa/pipeline.hpp"
#include "roiqa/records.hpp"
#include "roiqa/service.hpp"
#include "roiqa/train.hpp"

namespace roiqa::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Context {
  PipelineConfig config;
  unsigned jobs = 1;
};

// Flag value when given, else the config value, else the default.
template <typename T>
T pick(const CLI::Option* flag, const T& value, const std::optional<T>& configured, const T& fallback) {
  if (flag->count() > 0) return value;
  if (configured) return *configured;
  return fallback;
}

std::string need_path(const CLI::Option* flag, const std::string& value,
                      const std::optional<std::string>& configured, const std::string& config_key) {
  if (flag->count() > 0) return value;
  if (configured) return *configured;
  throw Error("missing " + flag->get_name() + " (or paths." + config_key + " in the pipeline config)");
}

fs::path dataset_dir_for(const CLI::Option* flag, const std::string& value, const Context& ctx,
                         const fs::path& manifest) {
  if (flag->count() > 0) return value;
  if (ctx.config.paths.dataset_dir) return *ctx.config.paths.dataset_dir;
  const fs::path parent = manifest.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

void summary(const Json& j) { std::cout << j.dump() << std::endl; }

std::vector<InstructionRecord> read_instructions(const fs::path& path) {
  std::vector<InstructionRecord> out;
  for (const auto& line : read_lines(path)) out.push_back(parse_instruction(line));
  return out;
}

Json families_json(const std::vector<DistortionType>& families) {
  Json out = Json::array();
  for (DistortionType t : families) out.push_back(std::string(to_string(t)));
  return out;
}

std::size_t count_rois(const DatasetManifest& m) {
  std::size_t n = 0;
  for (const auto& e : m.records) n += e.roi_ids.size();
  return n;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_st("roiqa");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("ROIQA_LOG_LEVEL")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honor it when asked for.
    if (level != spdlog::level::off || std::string_view(env) == "off") spdlog::set_level(level);
  }
}

// Blocks SIGINT/SIGTERM in every thread and stops the server from a waiter.
void serve_until_signal(AnnotationServer& server) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread waiter([&server, set] {
    int sig = 0;
    sigwait(&set, &sig);
    spdlog::info("signal {} received, stopping", sig);
    server.stop();
  });
  waiter.detach();
  server.run();
}

}  // namespace

int run(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Region-of-interest image quality assessment pipeline", "roiqa"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "roiqa 0.1.0");

  Context ctx;
  std::string pipeline_path;
  unsigned jobs_flag = 1;
  auto* pipeline_opt = app.add_option("-p,--pipeline-config", pipeline_path, "Pipeline config JSON")
                           ->check(CLI::ExistingFile);
  auto* jobs_opt = app.add_option("-j,--jobs", jobs_flag, "Worker threads")->check(CLI::PositiveNumber);

  std::function<void()> action;

  // synth
  auto* synth = app.add_subcommand("synth", "Render distorted copies of reference images");
  std::string s_ref, s_out, s_families, s_levels;
  std::uint64_t s_seed = 0;
  auto* s_ref_opt = synth->add_option("--ref-dir", s_ref, "Directory of reference PNGs");
  auto* s_out_opt = synth->add_option("--out-dir", s_out, "Dataset output directory");
  auto* s_fam_opt = synth->add_option("--families", s_families, "Comma-separated families");
  auto* s_lev_opt = synth->add_option("--levels", s_levels, "'all' or comma-separated indices 0-19");
  auto* s_seed_opt = synth->add_option("--seed", s_seed, "Synthesis seed");
  synth->callback([&] {
    action = [&] {
      const fs::path ref = need_path(s_ref_opt, s_ref, ctx.config.paths.ref_dir, "ref_dir");
      const fs::path out = need_path(s_out_opt, s_out, ctx.config.paths.dataset_dir, "dataset_dir");
      SynthOptions opts;
      opts.families = s_fam_opt->count() ? parse_families(s_families)
                                         : ctx.config.families.value_or(std::vector<DistortionType>(
                                               kAllDistortionTypes.begin(), kAllDistortionTypes.end()));
      opts.levels = s_lev_opt->count() ? parse_levels(s_levels) : ctx.config.levels.value_or(std::vector<std::size_t>{});
      opts.seed = pick(s_seed_opt, s_seed, ctx.config.seeds.synth, std::uint64_t{0});
      opts.jobs = ctx.jobs;
      const DatasetManifest m = synth_dataset(ref, out, opts);
      summary({{"command", "synth"},
               {"images", m.records.size()},
               {"families", families_json(opts.families)},
               {"levels", opts.levels.empty() ? kLevelsPerFamily : opts.levels.size()},
               {"manifest", (out / "manifest.jsonl").string()}});
    };
  });

  // masks
  auto* masks = app.add_subcommand("masks", "Propose region masks for every image");
  std::string m_data, m_dir, m_out;
  std::size_t m_per = 3;
  std::uint64_t m_seed = 0;
  auto* m_data_opt = masks->add_option("--data", m_data, "Input manifest");
  auto* m_dir_opt = masks->add_option("--dataset-dir", m_dir, "Dataset root (default: manifest directory)");
  auto* m_out_opt = masks->add_option("--out", m_out, "Output manifest (default: overwrite --data)");
  auto* m_per_opt = masks->add_option("--per-image", m_per, "Masks per image")->check(CLI::PositiveNumber);
  auto* m_seed_opt = masks->add_option("--seed", m_seed, "Proposal seed");
  masks->callback([&] {
    action = [&] {
      const fs::path data = need_path(m_data_opt, m_data, ctx.config.paths.manifest, "manifest");
      const fs::path dir = dataset_dir_for(m_dir_opt, m_dir, ctx, data);
      const fs::path out = m_out_opt->count() ? fs::path(m_out) : data;
      MaskProposalOptions opts;
      opts.per_image = pick(m_per_opt, m_per, ctx.config.masks_per_image, std::size_t{3});
      opts.seed = pick(m_seed_opt, m_seed, ctx.config.seeds.masks, std::uint64_t{0});
      opts.jobs = ctx.jobs;
      const DatasetManifest m = propose_dataset_masks(read_manifest(data), dir, opts);
      write_manifest(out, m);
      summary({{"command", "masks"}, {"images", m.records.size()}, {"rois", count_rois(m)}, {"manifest", out.string()}});
    };
  });

  // label
  auto* label = app.add_subcommand("label", "Label every ROI with the full-reference oracle");
  std::string l_data, l_dir, l_out;
  double l_thr = kCleanThreshold;
  auto* l_data_opt = label->add_option("--data", l_data, "Manifest with ROIs");
  auto* l_dir_opt = label->add_option("--dataset-dir", l_dir, "Dataset root (default: manifest directory)");
  auto* l_out_opt = label->add_option("--out", l_out, "Output labels (JSON lines)");
  auto* l_thr_opt = label->add_option("--clean-threshold", l_thr, "Oracle score above which an ROI is clean");
  label->callback([&] {
    action = [&] {
      const fs::path data = need_path(l_data_opt, l_data, ctx.config.paths.manifest, "manifest");
      const fs::path dir = dataset_dir_for(l_dir_opt, l_dir, ctx, data);
      const fs::path out = need_path(l_out_opt, l_out, ctx.config.paths.labels, "labels");
      LabelOptions opts;
      opts.clean_threshold = pick(l_thr_opt, l_thr, ctx.config.clean_threshold, kCleanThreshold);
      opts.jobs = ctx.jobs;
      const auto labels = label_dataset(read_manifest(data), dir, opts);
      write_labels(out, labels);
      std::size_t clean = 0;
      for (const auto& r : labels) clean += present_distortions(r).empty() ? 1 : 0;
      summary({{"command", "label"}, {"rois", labels.size()}, {"clean_rois", clean}, {"labels", out.string()}});
    };
  });

  // instruct
  auto* instruct = app.add_subcommand("instruct", "Generate analysis and judgment instructions");
  std::string i_labels, i_out, i_mode;
  std::uint64_t i_seed = 0;
  auto* i_labels_opt = instruct->add_option("--labels", i_labels, "Labels (JSON lines)");
  auto* i_out_opt = instruct->add_option("--out", i_out, "Output instructions (JSON lines)");
  auto* i_mode_opt = instruct->add_option("--mode", i_mode, "Template mode")->check(CLI::IsMember({"fixed", "random"}));
  auto* i_seed_opt = instruct->add_option("--seed", i_seed, "Instruction seed");
  instruct->callback([&] {
    action = [&] {
      const fs::path labels = need_path(i_labels_opt, i_labels, ctx.config.paths.labels, "labels");
      const fs::path out = need_path(i_out_opt, i_out, ctx.config.paths.instructions, "instructions");
      const std::string mode = pick(i_mode_opt, i_mode, ctx.config.template_mode, std::string("fixed"));
      const std::uint64_t seed = pick(i_seed_opt, i_seed, ctx.config.seeds.instruct, std::uint64_t{0});
      const auto records = generate_instructions(read_labels(labels), parse_template_mode(mode), seed);
      write_instructions(out, records);
      std::size_t judgments = 0;
      for (const auto& r : records) judgments += is_judgment(r.kind) ? 1 : 0;
      summary({{"command", "instruct"},
               {"records", records.size()},
               {"judgments", judgments},
               {"mode", mode},
               {"instructions", out.string()}});
    };
  });

  // split
  auto* split = app.add_subcommand("split", "Tag images as train or test");
  std::string p_data, p_out;
  double p_frac = 0.8;
  std::uint64_t p_seed = 0;
  auto* p_data_opt = split->add_option("--data", p_data, "Manifest");
  auto* p_out_opt = split->add_option("--out", p_out, "Output manifest with split tags");
  auto* p_frac_opt = split->add_option("--train-fraction", p_frac, "Fraction of images for training");
  auto* p_seed_opt = split->add_option("--seed", p_seed, "Split seed");
  split->callback([&] {
    action = [&] {
      const fs::path data = need_path(p_data_opt, p_data, ctx.config.paths.manifest, "manifest");
      const fs::path out = need_path(p_out_opt, p_out, ctx.config.paths.split, "split");
      const double frac = pick(p_frac_opt, p_frac, ctx.config.train_fraction, 0.8);
      if (!(frac > 0.0 && frac < 1.0)) throw Error("--train-fraction must lie in (0, 1)");
      DatasetManifest m = read_manifest(data);
      const auto [train_set, test_set] = split_dataset(m, frac, pick(p_seed_opt, p_seed, ctx.config.seeds.split, std::uint64_t{0}));
      std::map<std::string, Split> tag;
      for (const auto& e : train_set.records) tag[e.image_id] = Split::Train;
      for (const auto& e : test_set.records) tag[e.image_id] = Split::Test;
      for (auto& e : m.records) e.split = tag.at(e.image_id);
      write_manifest(out, m);
      summary({{"command", "split"},
               {"train_images", train_set.records.size()},
               {"test_images", test_set.records.size()},
               {"manifest", out.string()}});
    };
  });

  // train / eval share data flags
  struct DataFlags {
    std::string data, dir, labels, instructions;
    std::uint64_t jir_seed = 0;
    CLI::Option *data_opt, *dir_opt, *labels_opt, *instr_opt, *jir_opt;
  };
  auto add_data_flags = [](CLI::App* sub, DataFlags& f) {
    f.data_opt = sub->add_option("--data", f.data, "Manifest with split tags");
    f.dir_opt = sub->add_option("--dataset-dir", f.dir, "Dataset root (default: manifest directory)");
    f.labels_opt = sub->add_option("--labels", f.labels, "Labels (JSON lines)");
    f.instr_opt = sub->add_option("--instructions", f.instructions, "Instructions; judgments are generated when absent");
    f.jir_opt = sub->add_option("--jir-seed", f.jir_seed, "Seed for generated judgments");
  };
  auto load_split = [&ctx](DataFlags& f, Split which, const ModelConfig& model) {
    const fs::path data = need_path(f.data_opt, f.data, ctx.config.paths.split, "split");
    const fs::path dir = dataset_dir_for(f.dir_opt, f.dir, ctx, data);
    const fs::path labels = need_path(f.labels_opt, f.labels, ctx.config.paths.labels, "labels");
    std::vector<InstructionRecord> instr;
    if (f.instr_opt->count()) {
      instr = read_instructions(f.instructions);
    } else if (ctx.config.paths.instructions) {
      instr = read_instructions(*ctx.config.paths.instructions);
    }
    const std::uint64_t jir = pick(f.jir_opt, f.jir_seed, ctx.config.seeds.jir, std::uint64_t{0});
    return load_samples(read_manifest(data), dir, read_labels(labels), instr, which, model, jir, ctx.jobs);
  };

  auto* trn = app.add_subcommand("train", "Train the model on the train split");
  DataFlags t_flags;
  std::string t_config, t_out;
  add_data_flags(trn, t_flags);
  auto* t_config_opt = trn->add_option("--config", t_config, "Training config JSON");
  auto* t_out_opt = trn->add_option("--out", t_out, "Checkpoint directory");
  trn->callback([&] {
    action = [&] {
      const fs::path cfg_path = need_path(t_config_opt, t_config, ctx.config.model_config, "model_config");
      const fs::path out = need_path(t_out_opt, t_out, ctx.config.paths.checkpoint, "checkpoint");
      const TrainConfig cfg = parse_train_config(read_file(cfg_path));
      const SampleSet data = load_split(t_flags, Split::Train, cfg.model);
      spdlog::info("training on {} images, {} ROIs", data.images.size(), data.roi_count());
      MfeModel model(cfg.model, cfg.seed);
      const TrainResult result = train(model, data, cfg, ctx.jobs, [&cfg](std::size_t epoch, double loss) {
        spdlog::info("epoch {}/{} loss {:.6f}", epoch, cfg.epochs, loss);
      });
      fs::create_directories(out);
      model.save(out);
      Json log{{"config", Json::parse(train_config_to_json(cfg))}, {"steps", result.steps}, {"epoch_loss", result.epoch_loss}};
      write_file_atomic(out / "train.json", log.dump(2) + "\n");
      summary({{"command", "train"},
               {"images", data.images.size()},
               {"rois", data.roi_count()},
               {"steps", result.steps},
               {"final_loss", result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back()},
               {"checkpoint", out.string()}});
    };
  });

  auto* evl = app.add_subcommand("eval", "Score a checkpoint on one split");
  DataFlags e_flags;
  std::string e_ckpt, e_report, e_split = "test";
  add_data_flags(evl, e_flags);
  auto* e_ckpt_opt = evl->add_option("--ckpt", e_ckpt, "Checkpoint directory");
  auto* e_report_opt = evl->add_option("--report", e_report, "Report JSON path");
  evl->add_option("--split", e_split, "Split to score")->check(CLI::IsMember({"train", "test"}));
  evl->callback([&] {
    action = [&] {
      const fs::path ckpt = need_path(e_ckpt_opt, e_ckpt, ctx.config.paths.checkpoint, "checkpoint");
      const fs::path report = need_path(e_report_opt, e_report, ctx.config.paths.report, "report");
      const MfeModel model = MfeModel::load(ckpt);
      const SampleSet data = load_split(e_flags, parse_split(e_split), model.config());
      const EvalReport rep = evaluate(model, data, ctx.jobs);
      const std::string text = eval_report_to_json(rep);
      write_file_atomic(report, text + "\n");
      summary({{"command", "eval"},
               {"split", e_split},
               {"rois", rep.rois},
               {"quality_srocc", rep.quality.srocc.value},
               {"importance_srocc", rep.importance.srocc.value},
               {"distortion_type_f1", rep.distortion_type.f1},
               {"judgment_accuracy", rep.judgment_accuracy},
               {"report", report.string()}});
    };
  });

  // Annotation commands share the ROI universe and the ratings log.
  struct StoreFlags {
    std::string data, dir, log;
    CLI::Option *data_opt, *dir_opt, *log_opt;
  };
  auto add_store_flags = [](CLI::App* sub, StoreFlags& f) {
    f.data_opt = sub->add_option("--data", f.data, "Manifest with ROIs");
    f.dir_opt = sub->add_option("--dataset-dir", f.dir, "Dataset root (default: manifest directory)");
    f.log_opt = sub->add_option("--log", f.log, "Ratings log (JSON lines, append-only)");
  };
  auto open_store = [&ctx](StoreFlags& f, std::vector<std::string> annotators) {
    const fs::path data = need_path(f.data_opt, f.data, ctx.config.paths.manifest, "manifest");
    const fs::path dir = dataset_dir_for(f.dir_opt, f.dir, ctx, data);
    const fs::path log = need_path(f.log_opt, f.log, ctx.config.paths.ratings_log, "ratings_log");
    return std::make_unique<AnnotationStore>(rois_from_manifest(read_manifest(data), dir), std::move(annotators), log);
  };

  auto* serve = app.add_subcommand("serve", "Run the annotation HTTP service");
  StoreFlags v_flags;
  std::string v_annotators, v_host = "127.0.0.1";
  int v_port = 8080;
  add_store_flags(serve, v_flags);
  auto* v_ann_opt = serve->add_option("--annotators", v_annotators, "Registered annotator ids, one per line");
  auto* v_host_opt = serve->add_option("--host", v_host, "Bind address");
  auto* v_port_opt = serve->add_option("--port", v_port, "Port; 0 picks a free one")->check(CLI::Range(0, 65535));
  serve->callback([&] {
    action = [&] {
      const fs::path ann = need_path(v_ann_opt, v_annotators, ctx.config.paths.annotators, "annotators");
      auto store = open_store(v_flags, read_annotators(ann));
      AnnotationServer server(*store);
      const std::string host = pick(v_host_opt, v_host, ctx.config.host, std::string("127.0.0.1"));
      const int port = server.bind(host, pick(v_port_opt, v_port, ctx.config.port, 8080));
      spdlog::info("annotation service listening on http://{}:{}", host, port);
      summary({{"command", "serve"}, {"host", host}, {"port", port}, {"rois", store->progress().size()}});
      serve_until_signal(server);
    };
  });

  auto* aggregate = app.add_subcommand("aggregate", "Aggregate logged ratings per ROI");
  StoreFlags a_flags;
  std::string a_out;
  add_store_flags(aggregate, a_flags);
  aggregate->add_option("--out", a_out, "Aggregates (JSON lines)")->required();
  aggregate->callback([&] {
    action = [&] {
      auto store = open_store(a_flags, {});
      std::string text;
      std::size_t rated = 0, finalized = 0;
      for (const auto& p : store->progress()) {
        if (p.rater_count == 0) continue;
        ++rated;
        finalized += p.finalized ? 1 : 0;
        text += aggregated_to_json(store->aggregate(p.roi_id)) + "\n";
      }
      write_file_atomic(a_out, text);
      summary({{"command", "aggregate"}, {"rated_rois", rated}, {"finalized_rois", finalized}, {"out", a_out}});
    };
  });

  auto* exp = app.add_subcommand("export", "Write labels of finalized ROIs");
  StoreFlags x_flags;
  std::string x_out;
  add_store_flags(exp, x_flags);
  exp->add_option("--out", x_out, "Labels (JSON lines)")->required();
  exp->callback([&] {
    action = [&] {
      auto store = open_store(x_flags, {});
      const auto labels = store->export_labels();
      write_labels(x_out, labels);
      summary({{"command", "export"}, {"labels", labels.size()}, {"out", x_out}});
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0 && dynamic_cast<const CLI::CallForHelp*>(&e) == nullptr) std::cerr << app.help();
    return code;
  }

  try {
    if (pipeline_opt->count()) ctx.config = parse_pipeline_config(read_file(pipeline_path));
    ctx.jobs = pick(jobs_opt, jobs_flag, ctx.config.jobs, 1u);
    action();
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}

}  // namespace roiqa::cli
