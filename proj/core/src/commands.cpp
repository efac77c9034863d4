#include "dasa/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "dasa/adapt.hpp"
#include "dasa/experiment.hpp"
#include "dasa/model_io.hpp"
#include "dasa/rng.hpp"
#include "dasa/segment.hpp"
#include "dasa/synth.hpp"

namespace dasa {

namespace fs = std::filesystem;

namespace {

// sampling streams shared with the experiment runner semantics
enum SampleRole : std::uint64_t { kRoleSource = 0, kRoleUnlabeled = 1, kRoleLabeled = 2 };

std::uint64_t sample_seed(std::uint64_t seed, SampleRole role) {
  return splitmix64(derive_seed(seed, SeedTag::sampling) +
                    static_cast<std::uint64_t>(role));
}

void require(const std::string& value, const std::string& key, const std::string& cmd) {
  if (value.empty()) {
    throw UsageError(cmd + ": config key '" + key + "' is required");
  }
}

void require_exists(const std::string& path, const std::string& what) {
  if (!fs::exists(path)) {
    throw std::runtime_error(what + " '" + path + "' does not exist");
  }
}

fs::path prepare_out_dir(const RunConfig& cfg, const std::string& command) {
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  std::ofstream manifest(out / (command + "_manifest.txt"));
  manifest << "command = " << command << "\n" << cfg.manifest_text();
  return out;
}

void write_epoch_trace(const TrainTrace& trace, const fs::path& path) {
  std::ofstream out(path);
  out << "epoch,cost\n";
  char buf[48];
  for (const EpochRecord& r : trace) {
    std::snprintf(buf, sizeof(buf), "%zu,%.10g", r.epoch, r.cost);
    out << buf << "\n";
  }
}

void write_adapt_trace(const AdaptTrace& trace, const fs::path& path) {
  std::ofstream out(path);
  out << "epoch,layer,cost,gates_on_fraction\n";
  char buf[80];
  for (const AdaptRecord& r : trace) {
    std::snprintf(buf, sizeof(buf), "%zu,%d,%.10g,%.6f", r.epoch, r.layer, r.cost,
                  r.gate_fraction);
    out << buf << "\n";
  }
}

AeHyperparams pretrain_hp_from(const RunConfig& cfg) {
  AeHyperparams hp;
  hp.beta = cfg.beta;
  hp.rho = cfg.rho;
  hp.learning_rate = cfg.pretrain_lr;
  hp.epochs = cfg.pretrain_epochs;
  hp.batch_size = cfg.batch_size;
  return hp;
}

FinetuneConfig finetune_cfg_from(const RunConfig& cfg) {
  FinetuneConfig ft;
  ft.learning_rate = cfg.finetune_lr;
  ft.epochs = cfg.finetune_epochs;
  ft.batch_size = cfg.batch_size;
  ft.loss = cfg.loss == "cross_entropy" ? LossKind::cross_entropy
                                        : LossKind::squared_error;
  return ft;
}

AdaptConfig adapt_cfg_from(const RunConfig& cfg) {
  AdaptConfig ac;
  ac.tau = cfg.tau;
  ac.statistic = cfg.adapt_statistic == "per_sample" ? SaliencyStatistic::per_sample
                                                     : SaliencyStatistic::batch_mean;
  ac.learning_rate = cfg.adapt_lr;
  ac.epochs = cfg.adapt_epochs;
  ac.batch_size = cfg.batch_size;
  ac.beta = cfg.adapt_beta >= 0.0 ? cfg.adapt_beta : cfg.beta;
  ac.rho = cfg.adapt_rho >= 0.0 ? cfg.adapt_rho : cfg.rho;
  return ac;
}

OutputMode output_mode_from(const RunConfig& cfg) {
  return cfg.output_mode == "sigmoid" ? OutputMode::sigmoid_as_written
                                      : OutputMode::softmax;
}

ExperimentPlan plan_from(const RunConfig& cfg) {
  ExperimentPlan plan;
  plan.arms.clear();
  std::stringstream ss(cfg.arms);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      try {
        plan.arms.push_back(arm_from_name(item));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
  }
  plan.tau_grid = parse_double_list(cfg.tau_grid, "tau_grid");
  plan.seeds = parse_u64_list(cfg.seeds, "seeds");
  plan.source_dir = cfg.source_dir;
  plan.target_dir = cfg.target_dir;
  plan.split.source_train = cfg.source_train_images;
  plan.split.source_test = cfg.source_test_images;
  plan.split.target_unlabeled = cfg.target_unlabeled_images;
  plan.split.target_labeled = cfg.target_labeled_images;
  plan.split.target_test = cfg.target_test_images;
  plan.patch_side = cfg.patch_side;
  plan.fraction_source = cfg.fraction;
  plan.fraction_unlabeled = cfg.fraction_unlabeled;
  plan.fraction_labeled = cfg.fraction_labeled;
  plan.hidden1 = cfg.hidden1;
  plan.hidden2 = cfg.hidden2;
  plan.pretrain_hp = pretrain_hp_from(cfg);
  plan.finetune_cfg = finetune_cfg_from(cfg);
  plan.adapt_cfg = adapt_cfg_from(cfg);
  plan.output_mode = output_mode_from(cfg);
  return plan;
}

ModelMeta model_meta_from(const RunConfig& cfg) {
  return {
      {"seed", static_cast<double>(cfg.seed)},
      {"patch_side", static_cast<double>(cfg.patch_side)},
      {"pretrain_lr", cfg.pretrain_lr},
      {"pretrain_epochs", static_cast<double>(cfg.pretrain_epochs)},
      {"beta", cfg.beta},
      {"rho", cfg.rho},
      {"batch_size", static_cast<double>(cfg.batch_size)},
      {"finetune_lr", cfg.finetune_lr},
      {"finetune_epochs", static_cast<double>(cfg.finetune_epochs)},
  };
}

ShiftSpec shift_from(const RunConfig& cfg) {
  const auto gains = parse_double_list(cfg.shift_gain, "shift_gain");
  const auto biases = parse_double_list(cfg.shift_bias, "shift_bias");
  if (gains.size() != 3 || biases.size() != 3) {
    throw UsageError("shift_gain and shift_bias need exactly 3 comma-separated values");
  }
  ShiftSpec shift;
  for (std::size_t c = 0; c < 3; ++c) {
    shift.channel_gain[c] = gains[c];
    shift.channel_bias[c] = biases[c];
  }
  shift.noise_sigma = cfg.shift_noise;
  return shift;
}

}  // namespace

void cmd_train_source(const RunConfig& cfg) {
  require(cfg.source_dir, "source_dir", "train-source");
  require_exists(cfg.source_dir, "source dataset directory");
  const fs::path out = prepare_out_dir(cfg, "train-source");

  const std::vector<LoadedImage> images = load_dataset_dir(cfg.source_dir);
  if (images.size() < cfg.source_train_images) {
    throw std::runtime_error("train-source: source directory holds " +
                             std::to_string(images.size()) + " images, need " +
                             std::to_string(cfg.source_train_images));
  }
  std::vector<SampleInput> inputs;
  for (std::size_t i = 0; i < cfg.source_train_images; ++i) {
    inputs.push_back({&images[i].image, &images[i].mask,
                      images[i].fov.has_value() ? &*images[i].fov : nullptr});
  }
  const PatchDataset ds =
      sample_patches(inputs, cfg.fraction, cfg.patch_side,
                     sample_seed(cfg.seed, kRoleSource), "source_train");

  TrainArtifacts artifacts;
  const SaeDnnModel model =
      train_sae_dnn(ds, cfg.hidden1, cfg.hidden2, pretrain_hp_from(cfg),
                    finetune_cfg_from(cfg), output_mode_from(cfg), cfg.seed, &artifacts);

  save_model(model, (out / "model_source.dasa").string(), model_meta_from(cfg));
  write_epoch_trace(artifacts.ae1_trace, out / "ae1_trace.csv");
  write_epoch_trace(artifacts.ae2_trace, out / "ae2_trace.csv");
  write_epoch_trace(artifacts.finetune_trace, out / "finetune_trace.csv");
  std::cout << "wrote " << (out / "model_source.dasa").string() << " ("
            << ds.size() << " training patches)\n";
}

void cmd_adapt(const RunConfig& cfg) {
  require(cfg.model_in, "model_in", "adapt");
  require(cfg.target_dir, "target_dir", "adapt");
  require_exists(cfg.model_in, "source model file");
  require_exists(cfg.target_dir, "target dataset directory");
  const fs::path out = prepare_out_dir(cfg, "adapt");

  const SaeDnnModel source_model = load_model(cfg.model_in);

  const std::vector<LoadedImage> images = load_dataset_dir(cfg.target_dir);
  const std::size_t need = cfg.target_unlabeled_images + cfg.target_labeled_images;
  if (images.size() < need) {
    throw std::runtime_error("adapt: target directory holds " +
                             std::to_string(images.size()) + " images, need " +
                             std::to_string(need));
  }
  std::vector<SampleInput> unlabeled_inputs;
  for (std::size_t i = 0; i < cfg.target_unlabeled_images; ++i) {
    unlabeled_inputs.push_back({&images[i].image, nullptr,
                                images[i].fov.has_value() ? &*images[i].fov : nullptr});
  }
  std::vector<SampleInput> labeled_inputs;
  for (std::size_t i = cfg.target_unlabeled_images; i < need; ++i) {
    labeled_inputs.push_back({&images[i].image, &images[i].mask,
                              images[i].fov.has_value() ? &*images[i].fov : nullptr});
  }
  const PatchDataset unlabeled =
      sample_patches(unlabeled_inputs, cfg.fraction_unlabeled, cfg.patch_side,
                     sample_seed(cfg.seed, kRoleUnlabeled), "target_unlabeled");
  const PatchDataset labeled =
      sample_patches(labeled_inputs, cfg.fraction_labeled, cfg.patch_side,
                     sample_seed(cfg.seed, kRoleLabeled), "target_labeled");

  AdaptConfig ac = adapt_cfg_from(cfg);
  ac.seed = cfg.seed;
  FinetuneConfig fc = finetune_cfg_from(cfg);
  fc.seed = derive_seed(cfg.seed, SeedTag::finetune);

  AdaptTrace adapt_trace;
  TrainTrace finetune_trace;
  LabeledBatch batch{labeled.patches, labeled.labels};
  const SaeDnnModel adapted = dasa(source_model, unlabeled.patches, batch, ac, fc,
                                   &adapt_trace, &finetune_trace);

  ModelMeta meta = model_meta_from(cfg);
  meta["tau"] = ac.tau;
  meta["adapt_lr"] = ac.learning_rate;
  meta["adapt_epochs"] = static_cast<double>(ac.epochs);
  save_model(adapted, (out / "model_target.dasa").string(), meta);
  write_adapt_trace(adapt_trace, out / "adapt_trace.csv");
  write_epoch_trace(finetune_trace, out / "adapt_finetune_trace.csv");
  std::cout << "wrote " << (out / "model_target.dasa").string() << " (tau " << ac.tau
            << ", " << unlabeled.size() << " unlabeled / " << labeled.size()
            << " labeled patches)\n";
}

void cmd_evaluate(const RunConfig& cfg) {
  const ExperimentPlan plan = plan_from(cfg);
  const bool needs_source =
      std::any_of(plan.arms.begin(), plan.arms.end(), [](Arm a) {
        return a == Arm::SOURCE || a == Arm::BL1 || a == Arm::DASA;
      });
  const bool needs_target =
      std::any_of(plan.arms.begin(), plan.arms.end(), [](Arm a) {
        return a != Arm::SOURCE;
      });
  if (needs_source) {
    require(cfg.source_dir, "source_dir", "evaluate");
    require_exists(cfg.source_dir, "source dataset directory");
  }
  if (needs_target) {
    require(cfg.target_dir, "target_dir", "evaluate");
    require_exists(cfg.target_dir, "target dataset directory");
  }
  const fs::path out = prepare_out_dir(cfg, "evaluate");

  const ExperimentResult result = run_experiment(plan);
  write_metrics_csv(result, out / "metrics.csv");

  nlohmann::json report = nlohmann::json::array();
  for (const ArmRun& run : result.runs) {
    nlohmann::json j;
    j["arm"] = arm_name(run.arm);
    j["seed"] = run.seed;
    j["logloss_mean"] = run.report.logloss_mean;
    j["logloss_std"] = run.report.logloss_std;
    j["auc_mean"] = run.report.auc_mean;
    j["auc_std"] = run.report.auc_std;
    report.push_back(j);
  }
  std::ofstream(out / "report.json") << report.dump(2) << "\n";

  for (const ArmRun& run : result.runs) {
    std::printf("%-6s seed %llu  logloss %.4f +/- %.4f  auc %.4f +/- %.4f\n",
                arm_name(run.arm).c_str(), static_cast<unsigned long long>(run.seed),
                run.report.logloss_mean, run.report.logloss_std, run.report.auc_mean,
                run.report.auc_std);
  }
  std::cout << "wrote " << (out / "metrics.csv").string() << "\n";
}

void cmd_sweep_tau(const RunConfig& cfg) {
  require(cfg.source_dir, "source_dir", "sweep-tau");
  require(cfg.target_dir, "target_dir", "sweep-tau");
  require_exists(cfg.source_dir, "source dataset directory");
  require_exists(cfg.target_dir, "target dataset directory");
  const fs::path out = prepare_out_dir(cfg, "sweep-tau");

  const std::vector<TauPoint> points = tau_sweep(plan_from(cfg));
  write_sweep_csv(points, out / "sweep.csv");
  for (const TauPoint& p : points) {
    std::printf("tau %-5g logloss %.4f +/- %.4f\n", p.tau, p.logloss_mean,
                p.logloss_std);
  }
  std::cout << "wrote " << (out / "sweep.csv").string() << "\n";
}

void cmd_synth(const RunConfig& cfg) {
  const fs::path out = prepare_out_dir(cfg, "synth");
  const ShiftSpec shift = shift_from(cfg);

  const std::size_t total = cfg.synth_source_images + cfg.synth_target_images;
  if (total == 0) {
    throw UsageError("synth: need at least one image");
  }
  const DomainPair pair = synth_domain_pair(total, cfg.image_width, cfg.image_height,
                                            cfg.seed, shift);

  // disjoint halves so that source and target never share vessel geometry
  std::vector<SynthImage> source(pair.source.begin(),
                                 pair.source.begin() + cfg.synth_source_images);
  std::vector<SynthImage> target(pair.target.begin() + cfg.synth_source_images,
                                 pair.target.end());
  write_synth_dir(source, out / "source");
  write_synth_dir(target, out / "target");
  std::cout << "wrote " << cfg.synth_source_images << " source and "
            << cfg.synth_target_images << " target images under " << out.string()
            << "\n";
}

void cmd_segment(const RunConfig& cfg) {
  require(cfg.model_in, "model_in", "segment");
  require(cfg.image, "image", "segment");
  require_exists(cfg.model_in, "model file");
  require_exists(cfg.image, "input image");
  if (!cfg.fov.empty()) {
    require_exists(cfg.fov, "fov image");
  }
  const fs::path out = prepare_out_dir(cfg, "segment");

  const SaeDnnModel model = load_model(cfg.model_in);
  const RasterImage img = load_image(cfg.image);
  std::optional<RasterImage> fov;
  if (!cfg.fov.empty()) {
    fov = load_image(cfg.fov);
  }

  const ProbabilityMap map =
      segment_image(model, img, cfg.patch_side, fov.has_value() ? &*fov : nullptr);
  const fs::path map_path =
      out / (fs::path(cfg.image).stem().string() + "_prob.pgm");
  save_prob_map(map, map_path.string());
  std::cout << "wrote " << map_path.string() << "\n";
}

}  // namespace dasa
