#include "dasa/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "dasa/rng.hpp"
#include "dasa/segment.hpp"

namespace dasa {

namespace {

// Stage streams inside one experiment seed.
enum ExpStream : std::uint64_t {
  kSampleSource = 0,
  kSampleUnlabeled = 1,
  kSampleLabeled = 2,
  kSourceMaster = 3,
  kBl2Master = 4,
  kDasaAdapt = 5,
  kDasaFinetune = 6,
};

std::uint64_t exp_mix(std::uint64_t seed, ExpStream stream) {
  return splitmix64(seed ^ splitmix64(0xE0ULL + static_cast<std::uint64_t>(stream)));
}

RasterImage to_single_channel(RasterImage img) {
  if (img.channels == 1) {
    return img;
  }
  RasterImage out = RasterImage::make(img.width, img.height, 1);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      double sum = 0.0;
      for (std::size_t c = 0; c < img.channels; ++c) {
        sum += img.at(x, y, c);
      }
      out.at(x, y) = sum / static_cast<double>(img.channels);
    }
  }
  return out;
}

std::optional<std::filesystem::path> find_companion(const std::filesystem::path& dir,
                                                    const std::string& stem) {
  for (const char* ext : {".png", ".pgm", ".ppm"}) {
    const std::filesystem::path candidate = dir / (stem + ext);
    if (std::filesystem::exists(candidate)) {
      return candidate;
    }
  }
  return std::nullopt;
}

std::vector<SampleInput> to_sample_inputs(std::span<const LoadedImage> images,
                                          bool with_masks) {
  std::vector<SampleInput> inputs;
  inputs.reserve(images.size());
  for (const LoadedImage& li : images) {
    SampleInput si;
    si.image = &li.image;
    si.mask = with_masks ? &li.mask : nullptr;
    si.fov = li.fov.has_value() ? &*li.fov : nullptr;
    inputs.push_back(si);
  }
  return inputs;
}

std::span<const LoadedImage> slice(const std::vector<LoadedImage>& v, std::size_t offset,
                                   std::size_t count, const std::string& what) {
  if (offset + count > v.size()) {
    throw std::invalid_argument("experiment: dataset has " + std::to_string(v.size()) +
                                " images; " + what + " needs images [" +
                                std::to_string(offset) + ", " +
                                std::to_string(offset + count) + ")");
  }
  return std::span<const LoadedImage>(v.data() + offset, count);
}

}  // namespace

std::string arm_name(Arm arm) {
  switch (arm) {
    case Arm::SOURCE:
      return "SOURCE";
    case Arm::BL1:
      return "BL1";
    case Arm::BL2:
      return "BL2";
    case Arm::DASA:
      return "DASA";
  }
  return "?";
}

Arm arm_from_name(const std::string& name) {
  if (name == "SOURCE") {
    return Arm::SOURCE;
  }
  if (name == "BL1") {
    return Arm::BL1;
  }
  if (name == "BL2") {
    return Arm::BL2;
  }
  if (name == "DASA") {
    return Arm::DASA;
  }
  throw std::invalid_argument("unknown experiment arm '" + name +
                              "' (expected SOURCE, BL1, BL2 or DASA)");
}

std::vector<LoadedImage> load_dataset_dir(const std::filesystem::path& root) {
  const std::filesystem::path images_dir = root / "images";
  const std::filesystem::path masks_dir = root / "masks";
  const std::filesystem::path fov_dir = root / "fov";
  if (!std::filesystem::is_directory(images_dir)) {
    throw std::runtime_error("dataset directory '" + root.string() +
                             "' has no images/ subdirectory");
  }

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(images_dir)) {
    const std::string ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".ppm" || ext == ".pgm") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw std::runtime_error("dataset directory '" + images_dir.string() +
                             "' contains no .png/.ppm/.pgm images");
  }

  std::vector<LoadedImage> out;
  out.reserve(files.size());
  for (const auto& file : files) {
    LoadedImage li;
    li.id = file.stem().string();
    li.image = load_image(file.string());
    const auto mask_path = find_companion(masks_dir, li.id);
    if (!mask_path.has_value()) {
      throw std::runtime_error("dataset image '" + file.string() +
                               "' has no companion mask under '" + masks_dir.string() +
                               "'");
    }
    li.mask = to_single_channel(load_image(mask_path->string()));
    if (const auto fov_path = find_companion(fov_dir, li.id); fov_path.has_value()) {
      li.fov = to_single_channel(load_image(fov_path->string()));
    }
    out.push_back(std::move(li));
  }
  return out;
}

void ExperimentPlan::validate() const {
  if (arms.empty()) {
    throw std::invalid_argument("ExperimentPlan: no arms");
  }
  if (seeds.empty()) {
    throw std::invalid_argument("ExperimentPlan: no seeds");
  }
  for (double tau : tau_grid) {
    if (!(tau >= 0.0 && tau <= 1.0)) {
      throw std::invalid_argument("ExperimentPlan: tau grid value " +
                                  std::to_string(tau) + " outside [0,1]");
    }
  }
  if (patch_side == 0 || patch_side % 2 == 0) {
    throw std::invalid_argument("ExperimentPlan: patch_side must be odd");
  }
  for (double f : {fraction_source, fraction_unlabeled, fraction_labeled}) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw std::invalid_argument("ExperimentPlan: sampling fraction " +
                                  std::to_string(f) + " outside (0,1]");
    }
  }
  if (hidden1 == 0 || hidden2 == 0) {
    throw std::invalid_argument("ExperimentPlan: hidden dims must be >= 1");
  }
  pretrain_hp.validate();
  finetune_cfg.validate();
  adapt_cfg.validate();
}

SaeDnnModel train_sae_dnn(const PatchDataset& labeled, std::size_t hidden1,
                          std::size_t hidden2, const AeHyperparams& pretrain_hp,
                          const FinetuneConfig& finetune_cfg, OutputMode mode,
                          std::uint64_t master_seed, TrainArtifacts* artifacts) {
  labeled.validate();
  if (!labeled.labeled()) {
    throw std::invalid_argument("train_sae_dnn: dataset carries no labels");
  }

  PretrainConfig pc;
  pc.hidden1 = hidden1;
  pc.hidden2 = hidden2;
  pc.ae = pretrain_hp;
  pc.ae.seed = master_seed;
  PretrainResult pr = pretrain(labeled.patches, pc);
  if (artifacts != nullptr) {
    artifacts->ae1_trace = std::move(pr.trace1);
    artifacts->ae2_trace = std::move(pr.trace2);
  }

  SaeDnnModel model =
      assemble_model(std::move(pr.layer1), std::move(pr.layer2), 2,
                     derive_seed(master_seed, SeedTag::target_init), mode);

  FinetuneConfig ft = finetune_cfg;
  ft.seed = derive_seed(master_seed, SeedTag::finetune);
  LabeledBatch batch{labeled.patches, labeled.labels};
  return finetune(std::move(model), batch, ft,
                  artifacts != nullptr ? &artifacts->finetune_trace : nullptr);
}

MetricReport evaluate_model(const SaeDnnModel& m, std::span<const LoadedImage> test_images,
                            std::size_t patch_side) {
  if (test_images.empty()) {
    throw std::invalid_argument("evaluate_model: no test images");
  }
  std::vector<PerImageMetric> rows;
  rows.reserve(test_images.size());
  std::vector<double> probs;
  std::vector<int> labels;
  for (const LoadedImage& li : test_images) {
    const ProbabilityMap map =
        segment_image(m, li.image, patch_side, li.fov.has_value() ? &*li.fov : nullptr);
    probs.clear();
    labels.clear();
    collect_scored_pixels(map, li.mask, probs, labels);
    PerImageMetric row;
    row.image_id = li.id;
    row.logloss = logloss(probs, labels);
    row.auc = roc_auc(probs, labels).auc;
    rows.push_back(std::move(row));
  }
  return MetricReport::from_per_image(std::move(rows));
}

const MetricReport* ExperimentResult::find(Arm arm, std::uint64_t seed) const {
  for (const ArmRun& run : runs) {
    if (run.arm == arm && run.seed == seed) {
      return &run.report;
    }
  }
  return nullptr;
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();

  const bool needs_source_model =
      std::any_of(plan.arms.begin(), plan.arms.end(), [](Arm a) {
        return a == Arm::SOURCE || a == Arm::BL1 || a == Arm::DASA;
      });
  const bool needs_target =
      std::any_of(plan.arms.begin(), plan.arms.end(), [](Arm a) {
        return a == Arm::BL1 || a == Arm::BL2 || a == Arm::DASA;
      });
  const bool needs_labeled_target =
      std::any_of(plan.arms.begin(), plan.arms.end(), [](Arm a) {
        return a == Arm::BL2 || a == Arm::DASA;
      });
  const bool needs_dasa =
      std::any_of(plan.arms.begin(), plan.arms.end(), [](Arm a) {
        return a == Arm::DASA;
      });

  std::vector<LoadedImage> source_images;
  std::vector<LoadedImage> target_images;
  std::span<const LoadedImage> source_train, source_test;
  std::span<const LoadedImage> target_unlabeled, target_labeled, target_test;

  if (needs_source_model) {
    source_images = load_dataset_dir(plan.source_dir);
    source_train = slice(source_images, 0, plan.split.source_train, "source train split");
    if (std::find(plan.arms.begin(), plan.arms.end(), Arm::SOURCE) != plan.arms.end()) {
      source_test = slice(source_images, plan.split.source_train, plan.split.source_test,
                          "source test split");
    }
  }
  if (needs_target) {
    target_images = load_dataset_dir(plan.target_dir);
    target_unlabeled =
        slice(target_images, 0, plan.split.target_unlabeled, "target unlabeled split");
    target_labeled = slice(target_images, plan.split.target_unlabeled,
                           plan.split.target_labeled, "target labeled split");
    target_test =
        slice(target_images, plan.split.target_unlabeled + plan.split.target_labeled,
              plan.split.target_test, "target test split");
  }

  ExperimentResult result;
  for (const std::uint64_t seed : plan.seeds) {
    SaeDnnModel source_model;
    if (needs_source_model) {
      const PatchDataset src_ds =
          sample_patches(to_sample_inputs(source_train, true), plan.fraction_source,
                         plan.patch_side, exp_mix(seed, kSampleSource), "source_train");
      source_model =
          train_sae_dnn(src_ds, plan.hidden1, plan.hidden2, plan.pretrain_hp,
                        plan.finetune_cfg, plan.output_mode, exp_mix(seed, kSourceMaster));
    }

    PatchDataset labeled_ds;
    if (needs_labeled_target) {
      labeled_ds =
          sample_patches(to_sample_inputs(target_labeled, true), plan.fraction_labeled,
                         plan.patch_side, exp_mix(seed, kSampleLabeled), "target_labeled");
    }
    PatchDataset unlabeled_ds;
    if (needs_dasa) {
      unlabeled_ds = sample_patches(to_sample_inputs(target_unlabeled, false),
                                    plan.fraction_unlabeled, plan.patch_side,
                                    exp_mix(seed, kSampleUnlabeled), "target_unlabeled");
    }

    for (const Arm arm : plan.arms) {
      ArmRun run;
      run.arm = arm;
      run.seed = seed;
      try {
        switch (arm) {
          case Arm::SOURCE:
            run.report = evaluate_model(source_model, source_test, plan.patch_side);
            break;
          case Arm::BL1:
            run.report = evaluate_model(source_model, target_test, plan.patch_side);
            break;
          case Arm::BL2: {
            const SaeDnnModel bl2 =
                train_sae_dnn(labeled_ds, plan.hidden1, plan.hidden2, plan.pretrain_hp,
                              plan.finetune_cfg, plan.output_mode,
                              exp_mix(seed, kBl2Master));
            run.report = evaluate_model(bl2, target_test, plan.patch_side);
            break;
          }
          case Arm::DASA: {
            AdaptConfig ac = plan.adapt_cfg;
            ac.seed = exp_mix(seed, kDasaAdapt);
            FinetuneConfig fc = plan.finetune_cfg;
            fc.seed = exp_mix(seed, kDasaFinetune);
            LabeledBatch batch{labeled_ds.patches, labeled_ds.labels};
            const SaeDnnModel adapted =
                dasa(source_model, unlabeled_ds.patches, batch, ac, fc);
            run.report = evaluate_model(adapted, target_test, plan.patch_side);
            break;
          }
        }
      } catch (const std::exception& e) {
        throw std::runtime_error("experiment arm " + arm_name(arm) + " (seed " +
                                 std::to_string(seed) + "): " + e.what());
      }
      result.runs.push_back(std::move(run));
    }
  }
  return result;
}

std::vector<TauPoint> tau_sweep(const ExperimentPlan& plan) {
  plan.validate();
  if (plan.tau_grid.empty()) {
    throw std::invalid_argument("tau_sweep: empty tau grid");
  }

  const std::vector<LoadedImage> source_images = load_dataset_dir(plan.source_dir);
  const std::vector<LoadedImage> target_images = load_dataset_dir(plan.target_dir);
  const auto source_train =
      slice(source_images, 0, plan.split.source_train, "source train split");
  const auto target_unlabeled =
      slice(target_images, 0, plan.split.target_unlabeled, "target unlabeled split");
  const auto target_labeled = slice(target_images, plan.split.target_unlabeled,
                                    plan.split.target_labeled, "target labeled split");
  const auto target_test =
      slice(target_images, plan.split.target_unlabeled + plan.split.target_labeled,
            plan.split.target_test, "target test split");

  std::vector<TauPoint> points(plan.tau_grid.size());
  for (std::size_t t = 0; t < plan.tau_grid.size(); ++t) {
    points[t].tau = plan.tau_grid[t];
  }
  std::vector<std::vector<double>> pooled(plan.tau_grid.size());

  for (const std::uint64_t seed : plan.seeds) {
    const PatchDataset src_ds =
        sample_patches(to_sample_inputs(source_train, true), plan.fraction_source,
                       plan.patch_side, exp_mix(seed, kSampleSource), "source_train");
    const SaeDnnModel source_model =
        train_sae_dnn(src_ds, plan.hidden1, plan.hidden2, plan.pretrain_hp,
                      plan.finetune_cfg, plan.output_mode, exp_mix(seed, kSourceMaster));
    const PatchDataset unlabeled_ds = sample_patches(
        to_sample_inputs(target_unlabeled, false), plan.fraction_unlabeled,
        plan.patch_side, exp_mix(seed, kSampleUnlabeled), "target_unlabeled");
    const PatchDataset labeled_ds =
        sample_patches(to_sample_inputs(target_labeled, true), plan.fraction_labeled,
                       plan.patch_side, exp_mix(seed, kSampleLabeled), "target_labeled");

    for (std::size_t t = 0; t < plan.tau_grid.size(); ++t) {
      AdaptConfig ac = plan.adapt_cfg;
      ac.tau = plan.tau_grid[t];
      ac.seed = exp_mix(seed, kDasaAdapt);
      FinetuneConfig fc = plan.finetune_cfg;
      fc.seed = exp_mix(seed, kDasaFinetune);
      LabeledBatch batch{labeled_ds.patches, labeled_ds.labels};
      const SaeDnnModel adapted =
          dasa(source_model, unlabeled_ds.patches, batch, ac, fc);
      const MetricReport report = evaluate_model(adapted, target_test, plan.patch_side);
      points[t].per_seed_logloss.push_back(report.logloss_mean);
      for (const PerImageMetric& row : report.per_image) {
        pooled[t].push_back(row.logloss);
      }
    }
  }

  for (std::size_t t = 0; t < points.size(); ++t) {
    const auto& xs = pooled[t];
    double mean = 0.0;
    for (double x : xs) {
      mean += x;
    }
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) {
      var += (x - mean) * (x - mean);
    }
    points[t].logloss_mean = mean;
    points[t].logloss_std =
        xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
  }
  return points;
}

void write_metrics_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_metrics_csv: cannot open '" + path.string() + "'");
  }
  out << "arm,image_id,logloss,auc\n";
  char buf[64];
  for (const ArmRun& run : result.runs) {
    for (const PerImageMetric& row : run.report.per_image) {
      std::snprintf(buf, sizeof(buf), "%.6f,%.6f", row.logloss, row.auc);
      out << arm_name(run.arm) << ",seed" << run.seed << "/" << row.image_id << ","
          << buf << "\n";
    }
  }
}

void write_sweep_csv(std::span<const TauPoint> points, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_sweep_csv: cannot open '" + path.string() + "'");
  }
  out << "tau,logloss_mean,logloss_std\n";
  char buf[96];
  for (const TauPoint& p : points) {
    std::snprintf(buf, sizeof(buf), "%g,%.6f,%.6f", p.tau, p.logloss_mean,
                  p.logloss_std);
    out << buf << "\n";
  }
}

}  // namespace dasa
