// Thin shell over the C API: every subcommand's options are forwarded as
// string key/value pairs; all real work (and validation) happens behind
// aist_run().
#include <cstdio>
#include <deque>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aist/aist.h"

namespace {

struct Pending {
  std::string key;
  std::string value;
  CLI::Option* handle = nullptr;
};

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  std::deque<Pending> options;  // deque keeps addresses stable for CLI11
  std::vector<std::string> sets;

  void add(const char* key, const char* desc) {
    Pending& p = options.emplace_back();
    p.key = key;
    p.handle = app->add_option("--" + p.key, p.value, desc);
  }

  void add_config_flags() {
    add("config", "flat key=value config file");
    add("preset", "named preset: paper | desk");
    add("seed", "random seed (overrides config/env)");
    add("category", "crime category to model");
    app->add_option("--set", sets, "config override key=value (repeatable)");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("aist ") + aist_version() +
               " — attention-based spatio-temporal crime prediction"};
  app.require_subcommand(1);

  std::deque<Command> commands;
  const auto make = [&](const char* name, const char* desc) -> Command& {
    Command& c = commands.emplace_back();
    c.name = name;
    c.app = app.add_subcommand(name, desc);
    return c;
  };

  Command& ingest = make("ingest", "bin raw CSV exports into a tensor cache");
  ingest.add("crimes", "crime CSV: timestamp,category,community_area");
  ingest.add("taxi", "taxi CSV: pickup_ts,dropoff_ts,pickup_area,dropoff_area");
  ingest.add("pois", "POI CSV: community_area,poi_category");
  ingest.add("graph", "region graph file");
  ingest.add("tau", "time-step length in hours (default 4)");
  ingest.add("start", "span start timestamp, inclusive");
  ingest.add("end", "span end timestamp, exclusive");
  ingest.add("categories", "comma-separated crime categories to keep");
  ingest.add("out", "cache output directory");

  Command& synth = make("synth", "generate the planted-signal synthetic city");
  synth.add("out", "output directory");
  synth.add("seed", "generator seed (default 7)");
  synth.add("n", "number of regions, >= 4 (default 6)");
  synth.add("months", "span length in months (default 3)");
  synth.add("tau", "time-step length in hours (default 4)");
  synth.add("category", "crime category label (default theft)");
  synth.add("start-year", "first calendar year (default 2021)");

  Command& train = make("train", "train a model on a tensor cache");
  train.add("cache", "tensor cache directory");
  train.add("out", "output directory (checkpoint.bin, metrics.json)");
  train.add_config_flags();

  Command& eval = make("eval", "evaluate a checkpoint on a split");
  eval.add("cache", "tensor cache directory");
  eval.add("checkpoint", "trained checkpoint file");
  eval.add("split", "train | val | test | all (default test)");
  eval.add("out", "output directory");

  Command& ablate = make("ablate", "train an ablation variant");
  ablate.add("cache", "tensor cache directory");
  ablate.add("out", "output directory");
  ablate.add("variant",
             "base | aist_g | aist_h | aist_f | aist_fp | aist_r | aist_d | aist_w | aist_l");
  ablate.add_config_flags();

  Command& explain = make("explain", "emit attention/contribution heatmaps");
  explain.add("cache", "tensor cache directory");
  explain.add("checkpoint", "trained checkpoint file");
  explain.add("samples", "eval instances to sample (default 200)");
  explain.add("out", "output directory");

  Command& faith = make("faithfulness", "uniform/seed/adversarial attention suite");
  faith.add("cache", "tensor cache directory");
  faith.add("out", "output directory (report.json, curve.csv)");
  faith.add("lambdas", "comma-separated adversarial strengths (default 0,0.001,0.01,0.1)");
  faith.add_config_flags();

  Command& sweep = make("sweep", "replay a one-parameter search grid");
  sweep.add("cache", "tensor cache directory");
  sweep.add("out", "output directory (sweep.json)");
  sweep.add("param", "config key to sweep");
  sweep.add("values", "comma-separated values (default: built-in grid)");
  sweep.add_config_flags();

  CLI11_PARSE(app, argc, argv);

  for (const Command& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    aist_options* opts = aist_options_new();
    for (const Pending& p : cmd.options) {
      if (p.handle->count() > 0) aist_options_set(opts, p.key.c_str(), p.value.c_str());
    }
    if (!cmd.sets.empty()) {
      std::string joined;
      for (const std::string& s : cmd.sets) {
        if (!joined.empty()) joined += ',';
        joined += s;
      }
      aist_options_set(opts, "set", joined.c_str());
    }
    const aist_status status = aist_run(cmd.name.c_str(), opts);
    aist_options_free(opts);
    if (status != AIST_OK) {
      std::fprintf(stderr, "error: %s\n", aist_last_error());
      return static_cast<int>(status);
    }
    return 0;
  }
  std::fprintf(stderr, "error: no subcommand given\n");
  return static_cast<int>(AIST_USAGE_ERROR);
}
