#pragma once

#include "dasa/run_config.hpp"

namespace dasa {

// Pipeline entry points behind the CLI subcommands. Each writes its outputs
// and a manifest under cfg.out_dir and throws on failure (UsageError for
// missing required settings, std::runtime_error and friends otherwise).

void cmd_train_source(const RunConfig& cfg);
void cmd_adapt(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_sweep_tau(const RunConfig& cfg);
void cmd_synth(const RunConfig& cfg);
void cmd_segment(const RunConfig& cfg);

}  // namespace dasa
