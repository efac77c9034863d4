// Command-line front end: train-source, adapt, evaluate, sweep-tau, synth,
// segment. Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <exception>
#include <functional>
#include <list>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dasa/commands.hpp"
#include "dasa/run_config.hpp"

namespace {

struct CommonArgs {
  std::optional<std::string> config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
};

void add_shared_flags(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option_function<std::string>(
         "--config", [args](const std::string& v) { args->config_path = v; },
         "flat key = value config file");
  cmd->add_option_function<std::string>(
         "--seed", [args](const std::string& v) {
           args->overrides.emplace_back("seed", v);
           args->overrides.emplace_back("seeds", v);
         },
         "run seed (also pins the experiment seed list)");
  cmd->add_option_function<std::string>(
         "--out", [args](const std::string& v) { args->overrides.emplace_back("out_dir", v); },
         "output directory");
  cmd->add_option_function<std::vector<std::string>>(
         "--set", [args](const std::vector<std::string>& kvs) {
           for (const std::string& kv : kvs) {
             const std::size_t eq = kv.find('=');
             if (eq == std::string::npos) {
               throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
             }
             args->overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
           }
         },
         "override any config key (key=value, repeatable)");
}

void add_lr_epochs_flags(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option_function<std::string>(
         "--lr", [args](const std::string& v) {
           args->overrides.emplace_back("pretrain_lr", v);
           args->overrides.emplace_back("finetune_lr", v);
           args->overrides.emplace_back("adapt_lr", v);
         },
         "set every stage learning rate");
  cmd->add_option_function<std::string>(
         "--epochs", [args](const std::string& v) {
           args->overrides.emplace_back("pretrain_epochs", v);
           args->overrides.emplace_back("finetune_epochs", v);
           args->overrides.emplace_back("adapt_epochs", v);
         },
         "set every stage epoch count");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse stacked autoencoders with saliency-gated domain adaptation"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* cmd;
    CommonArgs args;
    std::function<void(const dasa::RunConfig&)> run;
  };
  std::list<Sub> subs;  // option callbacks hold pointers into the elements

  auto add = [&](const std::string& name, const std::string& desc,
                 std::function<void(const dasa::RunConfig&)> fn) -> Sub& {
    subs.push_back(Sub{app.add_subcommand(name, desc), {}, std::move(fn)});
    Sub& sub = subs.back();
    add_shared_flags(sub.cmd, &sub.args);
    return sub;
  };

  Sub& train = add("train-source", "pretrain and fine-tune a model on the source domain",
                   dasa::cmd_train_source);
  add_lr_epochs_flags(train.cmd, &train.args);
  train.cmd->add_option_function<std::string>(
      "--source-dir", [&](const std::string& v) {
        train.args.overrides.emplace_back("source_dir", v);
      },
      "source dataset directory");

  Sub& adapt = add("adapt", "two-stage domain adaptation of a source model",
                   dasa::cmd_adapt);
  add_lr_epochs_flags(adapt.cmd, &adapt.args);
  adapt.cmd->add_option_function<std::string>(
      "--tau", [&](const std::string& v) { adapt.args.overrides.emplace_back("tau", v); },
      "transfer coefficient");
  adapt.cmd->add_option_function<std::string>(
      "--model", [&](const std::string& v) {
        adapt.args.overrides.emplace_back("model_in", v);
      },
      "source model file");
  adapt.cmd->add_option_function<std::string>(
      "--target-dir", [&](const std::string& v) {
        adapt.args.overrides.emplace_back("target_dir", v);
      },
      "target dataset directory");

  add("evaluate", "run experiment arms and report per-image logloss/AUC",
      dasa::cmd_evaluate);
  add("sweep-tau", "run the DASA arm across the tau grid", dasa::cmd_sweep_tau);
  add("synth", "generate a synthetic source/target domain pair", dasa::cmd_synth);

  Sub& segment = add("segment", "write a per-pixel vessel probability map",
                     dasa::cmd_segment);
  segment.cmd->add_option_function<std::string>(
      "--model", [&](const std::string& v) {
        segment.args.overrides.emplace_back("model_in", v);
      },
      "model file");
  segment.cmd->add_option_function<std::string>(
      "--image", [&](const std::string& v) {
        segment.args.overrides.emplace_back("image", v);
      },
      "input image");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (Sub& sub : subs) {
    if (!sub.cmd->parsed()) {
      continue;
    }
    try {
      const dasa::RunConfig cfg =
          dasa::load_run_config(sub.args.config_path, sub.args.overrides);
      sub.run(cfg);
      return 0;
    } catch (const dasa::UsageError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 1;
}
