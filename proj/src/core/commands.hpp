#pragma once

#include <map>
#include <string>

#include "core/config.hpp"

namespace aist {

// Flat CLI option bag: long-option name (no dashes) -> value. Flags the user
// did not pass are absent. Multi-value options arrive comma-joined.
using Options = std::map<std::string, std::string>;

// Resolution order: struct defaults -> --preset -> --config file -> AIST_*
// env -> --set key=value pairs (comma-separated, in order) -> --variant ->
// --seed/--category convenience flags. Validates before returning.
Config resolve_config(const Options& opts);

void cmd_ingest(const Options& opts);
void cmd_synth(const Options& opts);
void cmd_train(const Options& opts);
void cmd_eval(const Options& opts);
void cmd_ablate(const Options& opts);
void cmd_explain(const Options& opts);
void cmd_faithfulness(const Options& opts);
void cmd_sweep(const Options& opts);

// Dispatches by name; throws UsageError on an unknown command.
void run_command(const std::string& command, const Options& opts);

}  // namespace aist
