#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dasa/commands.hpp"
#include "dasa/model_io.hpp"
#include "dasa/rng.hpp"
#include "dasa/run_config.hpp"
#include "dasa/sae_dnn.hpp"

using namespace dasa;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// overrides that shrink every pipeline stage to toy scale
std::vector<std::pair<std::string, std::string>> tiny_overrides(const fs::path& out) {
  return {
      {"out_dir", out.string()},
      {"patch_side", "5"},
      {"hidden1", "8"},
      {"hidden2", "4"},
      {"pretrain_epochs", "2"},
      {"finetune_epochs", "3"},
      {"adapt_epochs", "2"},
      {"batch_size", "32"},
      {"fraction", "0.2"},
      {"fraction_unlabeled", "0.2"},
      {"fraction_labeled", "0.2"},
      {"image_width", "28"},
      {"image_height", "28"},
      {"synth_source_images", "5"},
      {"synth_target_images", "5"},
      {"source_train_images", "3"},
      {"source_test_images", "2"},
      {"target_unlabeled_images", "2"},
      {"target_labeled_images", "1"},
      {"target_test_images", "2"},
      {"seed", "9"},
      {"seeds", "9"},
  };
}

}  // namespace

TEST_CASE("RunConfig defaults carry the reference hyperparameter block") {
  const RunConfig cfg;
  CHECK(cfg.hidden1 == 400);
  CHECK(cfg.hidden2 == 100);
  CHECK(cfg.patch_side == 15);
  CHECK(cfg.pretrain_lr == 0.3);
  CHECK(cfg.pretrain_epochs == 50);
  CHECK(cfg.finetune_lr == 0.1);
  CHECK(cfg.finetune_epochs == 200);
  CHECK(cfg.beta == 0.1);
  CHECK(cfg.rho == 0.04);
  CHECK(cfg.tau == 0.1);
  CHECK(cfg.fraction == 0.04);
  CHECK(cfg.batch_size == 100);

  const std::string manifest = cfg.manifest_text();
  CHECK(manifest.find("pretrain_lr = 0.3\n") != std::string::npos);
  CHECK(manifest.find("finetune_lr = 0.1\n") != std::string::npos);
  CHECK(manifest.find("pretrain_epochs = 50\n") != std::string::npos);
  CHECK(manifest.find("finetune_epochs = 200\n") != std::string::npos);
  CHECK(manifest.find("beta = 0.1\n") != std::string::npos);
  CHECK(manifest.find("rho = 0.04\n") != std::string::npos);
  CHECK(manifest.find("tau = 0.1\n") != std::string::npos);
  CHECK(manifest.find("hidden1 = 400\n") != std::string::npos);
  CHECK(manifest.find("hidden2 = 100\n") != std::string::npos);
  CHECK(manifest.find("patch_side = 15\n") != std::string::npos);
  CHECK(manifest.find("fraction = 0.04\n") != std::string::npos);
  CHECK(manifest.find("version = ") != std::string::npos);
  CHECK(cfg.manifest_text() == manifest);  // deterministic
}

TEST_CASE("RunConfig rejects unknown keys and bad values") {
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.set("learning_rate", "0.3"), UsageError);
  CHECK_THROWS_AS(cfg.set("tau", "fast"), UsageError);
  CHECK_THROWS_AS(cfg.set("hidden1", "-3"), UsageError);
  CHECK_THROWS_AS(cfg.set("output_mode", "relu"), UsageError);
  CHECK_THROWS_AS(cfg.get("nope"), UsageError);
  cfg.set("output_mode", "sigmoid");
  CHECK(cfg.output_mode == "sigmoid");
  cfg.set("tau", "0.15");
  CHECK(cfg.tau == 0.15);
  CHECK(cfg.get("tau") == "0.15");
}

TEST_CASE("load_run_config: file then flag precedence, comments ignored") {
  const fs::path path = fs::temp_directory_path() / "dasa_cfg_test.conf";
  {
    std::ofstream out(path);
    out << "# experiment configuration\n"
        << "tau = 0.2\n"
        << "\n"
        << "hidden1 = 32\n"
        << "  seeds = 4,5\n";
  }
  const RunConfig cfg = load_run_config(path.string(), {{"tau", "0.05"}});
  CHECK(cfg.tau == 0.05);      // flag wins over file
  CHECK(cfg.hidden1 == 32);    // file wins over default
  CHECK(cfg.hidden2 == 100);   // default untouched
  CHECK(cfg.seeds == "4,5");

  {
    std::ofstream out(path);
    out << "bogus_key = 1\n";
  }
  CHECK_THROWS_AS(load_run_config(path.string(), {}), UsageError);
  {
    std::ofstream out(path);
    out << "tau 0.3\n";
  }
  CHECK_THROWS_AS(load_run_config(path.string(), {}), UsageError);
  CHECK_THROWS_AS(load_run_config(std::string("/nonexistent/cfg"), {}), UsageError);
  fs::remove(path);
}

TEST_CASE("list parsing") {
  CHECK(parse_double_list("0, 0.05,0.1", "g") == std::vector<double>{0.0, 0.05, 0.1});
  CHECK(parse_u64_list("1,2,3", "s") == std::vector<std::uint64_t>{1, 2, 3});
  CHECK_THROWS_AS(parse_double_list("a,b", "g"), UsageError);
  CHECK_THROWS_AS(parse_u64_list("", "s"), UsageError);
}

TEST_CASE("synth + train-source + adapt command pipeline at toy scale") {
  const fs::path root = fs::temp_directory_path() / "dasa_cli_test";
  fs::remove_all(root);

  RunConfig synth_cfg = load_run_config(std::nullopt, tiny_overrides(root / "data"));
  cmd_synth(synth_cfg);
  CHECK(fs::exists(root / "data" / "source" / "images" / "000.ppm"));
  CHECK(fs::exists(root / "data" / "target" / "masks" / "004.pgm"));
  CHECK(fs::exists(root / "data" / "synth_manifest.txt"));

  auto train_overrides = tiny_overrides(root / "train");
  train_overrides.emplace_back("source_dir", (root / "data" / "source").string());
  RunConfig train_cfg = load_run_config(std::nullopt, train_overrides);
  cmd_train_source(train_cfg);
  const fs::path model_path = root / "train" / "model_source.dasa";
  CHECK(fs::exists(model_path));
  CHECK(fs::exists(root / "train" / "ae1_trace.csv"));
  CHECK(fs::exists(root / "train" / "finetune_trace.csv"));
  CHECK(fs::exists(root / "train" / "train-source_manifest.txt"));

  // byte-identical rerun under the same seed and config
  auto rerun_overrides = tiny_overrides(root / "train2");
  rerun_overrides.emplace_back("source_dir", (root / "data" / "source").string());
  cmd_train_source(load_run_config(std::nullopt, rerun_overrides));
  CHECK(slurp(model_path) == slurp(root / "train2" / "model_source.dasa"));
  CHECK(slurp(root / "train" / "ae1_trace.csv") ==
        slurp(root / "train2" / "ae1_trace.csv"));

  // zero-epoch adaptation returns the input model's weights untouched
  auto adapt_overrides = tiny_overrides(root / "adapt0");
  adapt_overrides.emplace_back("target_dir", (root / "data" / "target").string());
  adapt_overrides.emplace_back("model_in", model_path.string());
  adapt_overrides.emplace_back("adapt_epochs", "0");
  adapt_overrides.emplace_back("finetune_epochs", "0");
  cmd_adapt(load_run_config(std::nullopt, adapt_overrides));
  const SaeDnnModel before = load_model(model_path.string());
  const SaeDnnModel after = load_model((root / "adapt0" / "model_target.dasa").string());
  CHECK(before == after);

  // a real adaptation writes the trace with the documented schema
  auto adapt2 = tiny_overrides(root / "adapt1");
  adapt2.emplace_back("target_dir", (root / "data" / "target").string());
  adapt2.emplace_back("model_in", model_path.string());
  cmd_adapt(load_run_config(std::nullopt, adapt2));
  std::ifstream trace(root / "adapt1" / "adapt_trace.csv");
  std::string header;
  std::getline(trace, header);
  CHECK(header == "epoch,layer,cost,gates_on_fraction");
  const SaeDnnModel adapted =
      load_model((root / "adapt1" / "model_target.dasa").string());
  CHECK(adapted != before);

  fs::remove_all(root);
}

TEST_CASE("train-source with zero learning rates keeps the initialized weights") {
  const fs::path root = fs::temp_directory_path() / "dasa_lr0_test";
  fs::remove_all(root);

  auto overrides = tiny_overrides(root / "data");
  cmd_synth(load_run_config(std::nullopt, overrides));

  auto train_overrides = tiny_overrides(root / "train");
  train_overrides.emplace_back("source_dir", (root / "data" / "source").string());
  train_overrides.emplace_back("pretrain_lr", "0");
  train_overrides.emplace_back("finetune_lr", "0");
  const RunConfig cfg = load_run_config(std::nullopt, train_overrides);
  cmd_train_source(cfg);

  const SaeDnnModel model =
      load_model((root / "train" / "model_source.dasa").string());
  const AutoencoderParams init1 =
      init_params(75, 8, derive_seed(cfg.seed, SeedTag::ae1_init));
  const AutoencoderParams init2 =
      init_params(8, 4, derive_seed(cfg.seed, SeedTag::ae2_init));
  CHECK(model.layer1 == init1);
  CHECK(model.layer2 == init2);

  fs::remove_all(root);
}

TEST_CASE("commands fail early on missing required settings") {
  RunConfig cfg;
  cfg.out_dir = (fs::temp_directory_path() / "dasa_missing_test").string();
  CHECK_THROWS_AS(cmd_train_source(cfg), UsageError);  // no source_dir
  CHECK_THROWS_AS(cmd_adapt(cfg), UsageError);         // no model_in
  CHECK_THROWS_AS(cmd_segment(cfg), UsageError);       // no image
  fs::remove_all(cfg.out_dir);
}
