#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dasa {

inline constexpr const char* kToolVersion = "0.1.0";

// Raised for bad flags, bad config keys/values and missing required settings;
// the CLI maps it to exit code 1 (runtime failures exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key-value run configuration. Defaults mirror the reference
// hyperparameter block (400/100 hidden nodes, 15x15 patches, learning rates
// 0.3/0.1, 50/200 epochs, beta 0.1, rho 0.04, tau 0.1, 4% sampling).
// Precedence: command-line overrides > config file > defaults.
struct RunConfig {
  // paths
  std::string source_dir;
  std::string target_dir;
  std::string out_dir = "out";
  std::string model_in;
  std::string image;
  std::string fov;

  // data
  std::size_t patch_side = 15;
  double fraction = 0.04;
  double fraction_unlabeled = 0.04;
  double fraction_labeled = 0.04;
  std::size_t source_train_images = 20;
  std::size_t source_test_images = 20;
  std::size_t target_unlabeled_images = 10;
  std::size_t target_labeled_images = 3;
  std::size_t target_test_images = 7;

  // model
  std::size_t hidden1 = 400;
  std::size_t hidden2 = 100;
  std::string output_mode = "softmax";  // softmax | sigmoid
  std::string loss = "squared_error";   // squared_error | cross_entropy

  // unsupervised pretraining
  double pretrain_lr = 0.3;
  std::size_t pretrain_epochs = 50;
  double beta = 0.1;
  double rho = 0.04;
  std::size_t batch_size = 100;

  // supervised fine-tuning
  double finetune_lr = 0.1;
  std::size_t finetune_epochs = 200;

  // adaptation; adapt_beta / adapt_rho of -1 inherit beta / rho
  double tau = 0.1;
  double adapt_lr = 0.3;
  std::size_t adapt_epochs = 50;
  std::string adapt_statistic = "batch_mean";  // batch_mean | per_sample
  double adapt_beta = -1.0;
  double adapt_rho = -1.0;

  // experiment
  std::string arms = "SOURCE,BL1,BL2,DASA";
  std::string tau_grid = "0,0.05,0.1,0.15,0.2";
  std::string seeds = "1,2,3";
  std::uint64_t seed = 1;

  // synthetic data generation
  std::size_t synth_source_images = 20;
  std::size_t synth_target_images = 18;
  std::size_t image_width = 64;
  std::size_t image_height = 64;
  std::string shift_gain = "0.8,1.1,1.25";
  std::string shift_bias = "0.05,-0.02,0.03";
  double shift_noise = 0.01;

  // Typed set/get by key name; unknown keys and unparsable values raise
  // UsageError.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();  // sorted

  // Fully resolved configuration, sorted by key, plus the tool version.
  std::string manifest_text() const;
};

// Applies the config file (when given), then the overrides, in order.
RunConfig load_run_config(const std::optional<std::string>& config_path,
                          const std::vector<std::pair<std::string, std::string>>& overrides);

std::vector<double> parse_double_list(const std::string& csv, const std::string& what);
std::vector<std::uint64_t> parse_u64_list(const std::string& csv, const std::string& what);

}  // namespace dasa
