#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dasa/adapt.hpp"
#include "dasa/dataset.hpp"
#include "dasa/image.hpp"
#include "dasa/metrics.hpp"
#include "dasa/sae_dnn.hpp"

namespace dasa {

// SOURCE evaluates in-domain; BL1 deploys the source model on the target
// domain without adaptation; BL2 trains only on the limited labeled target
// split; DASA runs the two-stage pipeline.
enum class Arm { SOURCE, BL1, BL2, DASA };

std::string arm_name(Arm arm);
Arm arm_from_name(const std::string& name);

struct LoadedImage {
  std::string id;  // file stem
  RasterImage image;
  RasterImage mask;
  std::optional<RasterImage> fov;
};

// Directory layout: <root>/images/*.png|ppm, <root>/masks/<same stem>.png|pgm,
// optional <root>/fov/<same stem>.png|pgm. Files are ordered by stem.
std::vector<LoadedImage> load_dataset_dir(const std::filesystem::path& root);

// Image counts taken from the head of each directory listing, in order:
// source = train then test; target = unlabeled, labeled, test.
struct SplitCounts {
  std::size_t source_train = 20;
  std::size_t source_test = 20;
  std::size_t target_unlabeled = 10;
  std::size_t target_labeled = 3;
  std::size_t target_test = 7;
};

struct ExperimentPlan {
  std::vector<Arm> arms{Arm::SOURCE, Arm::BL1, Arm::BL2, Arm::DASA};
  std::vector<double> tau_grid{0.0, 0.05, 0.1, 0.15, 0.2};
  std::vector<std::uint64_t> seeds{1, 2, 3};

  std::filesystem::path source_dir;
  std::filesystem::path target_dir;
  SplitCounts split;
  std::size_t patch_side = 15;
  double fraction_source = 0.04;
  double fraction_unlabeled = 0.04;
  double fraction_labeled = 0.04;

  std::size_t hidden1 = 400;
  std::size_t hidden2 = 100;
  AeHyperparams pretrain_hp;   // per-run seeds are derived, the seed field is ignored
  FinetuneConfig finetune_cfg; // likewise
  AdaptConfig adapt_cfg;       // likewise; adapt_cfg.tau is the operating tau
  OutputMode output_mode = OutputMode::softmax;

  void validate() const;
};

struct TrainArtifacts {
  TrainTrace ae1_trace;
  TrainTrace ae2_trace;
  TrainTrace finetune_trace;
};

// Pretrain + assemble + finetune with stage seeds derived from master_seed.
SaeDnnModel train_sae_dnn(const PatchDataset& labeled, std::size_t hidden1,
                          std::size_t hidden2, const AeHyperparams& pretrain_hp,
                          const FinetuneConfig& finetune_cfg, OutputMode mode,
                          std::uint64_t master_seed, TrainArtifacts* artifacts = nullptr);

// Whole-image segmentation metrics per test image.
MetricReport evaluate_model(const SaeDnnModel& m, std::span<const LoadedImage> test_images,
                            std::size_t patch_side);

struct ArmRun {
  Arm arm = Arm::SOURCE;
  std::uint64_t seed = 0;
  MetricReport report;
};

struct ExperimentResult {
  std::vector<ArmRun> runs;  // ordered by seed, then by plan arm order

  const MetricReport* find(Arm arm, std::uint64_t seed) const;
};

ExperimentResult run_experiment(const ExperimentPlan& plan);

struct TauPoint {
  double tau = 0.0;
  std::vector<double> per_seed_logloss;  // mean over test images, one per seed
  double logloss_mean = 0.0;             // over images pooled across seeds
  double logloss_std = 0.0;
};

// Runs the DASA arm once per (tau, seed) with shared source models and
// sampling, so grid points differ only in tau.
std::vector<TauPoint> tau_sweep(const ExperimentPlan& plan);

// CSV schema: arm,image_id,logloss,auc (image ids are seed-prefixed).
void write_metrics_csv(const ExperimentResult& result, const std::filesystem::path& path);
// CSV schema: tau,logloss_mean,logloss_std
void write_sweep_csv(std::span<const TauPoint> points, const std::filesystem::path& path);

}  // namespace dasa
