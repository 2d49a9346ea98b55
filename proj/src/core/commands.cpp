#include "core/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "core/checkpoint.hpp"
#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/ingest.hpp"
#include "core/interpret.hpp"
#include "core/manifest.hpp"
#include "core/rng.hpp"
#include "core/svg.hpp"
#include "core/synth.hpp"
#include "core/text.hpp"
#include "core/training.hpp"

namespace aist {

namespace {

using nlohmann::ordered_json;

const std::string* find_opt(const Options& opts, const std::string& key) {
  const auto it = opts.find(key);
  return it == opts.end() ? nullptr : &it->second;
}

const std::string& require_opt(const Options& opts, const std::string& key) {
  const std::string* v = find_opt(opts, key);
  if (!v || v->empty()) throw UsageError("missing required option --" + key);
  return *v;
}

std::string get_or(const Options& opts, const std::string& key, const std::string& dflt) {
  const std::string* v = find_opt(opts, key);
  return v ? *v : dflt;
}

int int_opt(const Options& opts, const std::string& key, int dflt) {
  const std::string* v = find_opt(opts, key);
  if (!v) return dflt;
  const auto p = parse_int(*v);
  if (!p) throw UsageError("option --" + key + ": expected integer, got '" + *v + "'");
  return static_cast<int>(*p);
}

// Every command validates its option bag so typos fail loudly instead of
// silently falling back to defaults.
void check_options(const Options& opts, const std::set<std::string>& allowed) {
  for (const auto& [k, _] : opts) {
    if (!allowed.count(k)) throw UsageError("unknown option --" + k);
  }
}

const std::set<std::string> kConfigOpts = {"config", "preset", "set", "seed", "category"};

std::set<std::string> with_config_opts(std::set<std::string> extra) {
  extra.insert(kConfigOpts.begin(), kConfigOpts.end());
  return extra;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

CivilTime civil_opt(const Options& opts, const std::string& key) {
  const std::string& v = require_opt(opts, key);
  const auto t = parse_civil(v);
  if (!t) throw UsageError("option --" + key + ": expected timestamp, got '" + v + "'");
  return *t;
}

void add_cache_inputs(ManifestBuilder& m, const std::string& cache) {
  for (const char* f : {"regions.graph", "crimes.bin", "features.bin", "tensor_meta.json"})
    m.add_input(cache + "/" + std::string(f));
}

ordered_json config_json(const Config& cfg) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : config_items(cfg)) j[k] = v;
  return j;
}

ordered_json metric_json(const MetricReport& rep) {
  ordered_json j;
  j["mae"] = rep.mae;
  j["mse"] = rep.mse;
  j["norm_mse"] = rep.norm_mse;
  j["count"] = rep.count;
  ordered_json per = ordered_json::array();
  for (const auto& r : rep.per_region) {
    per.push_back({{"region_id", r.region_id}, {"mae", r.mae}, {"mse", r.mse}, {"count", r.count}});
  }
  j["per_region"] = per;
  return j;
}

ordered_json report_json_common(const IngestReport& rep) {
  ordered_json j;
  j["accepted"] = rep.accepted;
  ordered_json rej = ordered_json::object();
  for (const auto& [reason, n] : rep.rejected) rej[reason] = n;
  j["rejected"] = rej;
  return j;
}

// Shared by train/ablate: identical artifacts modulo the resolved config.
void run_training_command(const std::string& name, const Options& opts) {
  const std::string& cache = require_opt(opts, "cache");
  const std::string& out = require_opt(opts, "out");
  const Config cfg = resolve_config(opts);
  ensure_dir(out);

  ManifestBuilder manifest(name, out);
  manifest.set_seed(cfg.seed);
  manifest.set_config(cfg);
  add_cache_inputs(manifest, cache);
  if (const std::string* f = find_opt(opts, "config")) manifest.add_input(*f);

  const Dataset data = load_cache(cache);
  const TrainContext ctx = make_train_context(cfg, data);
  const TrainResult result = train(ctx);
  const MetricReport test = evaluate(ctx, result.best_params, ctx.split.test);

  const std::string ckpt_path = out + "/checkpoint.bin";
  save_checkpoint(to_checkpoint(ctx, result.best_params), ckpt_path);

  // metrics.json carries no command name or timing: rerunning the same
  // resolved config (train or null ablation) must reproduce it byte for byte.
  ordered_json j;
  j["config"] = config_json(cfg);
  j["windows"] = {{"emitted", ctx.window_report.emitted},
                  {"skipped_insufficient_history", ctx.window_report.skipped_insufficient_history}};
  j["split"] = {{"train", ctx.split.train.size()},
                {"val", ctx.split.val.size()},
                {"test", ctx.split.test.size()}};
  ordered_json epochs = ordered_json::array();
  for (const auto& e : result.log) {
    epochs.push_back({{"epoch", e.epoch},
                      {"batch_loss", e.batch_loss},
                      {"train_mse", e.train_mse},
                      {"val_mae", e.val_mae},
                      {"val_mse", e.val_mse}});
  }
  j["epochs"] = epochs;
  j["best_epoch"] = result.best_epoch;
  j["best_val_mae"] = result.best_val_mae;
  j["test"] = metric_json(test);
  write_text_file(out + "/metrics.json", j.dump(2) + "\n");

  manifest.add_output(ckpt_path);
  manifest.add_output(out + "/metrics.json");
  manifest.write();
}

// Loads a checkpoint and rebuilds the evaluation context against a cache,
// reusing the stored normalizer (never refit at eval time).
struct CheckpointRun {
  Checkpoint ckpt;
  Dataset data;
  TrainContext ctx;
};

CheckpointRun load_checkpoint_run(const std::string& ckpt_path, const std::string& cache) {
  CheckpointRun run;
  run.ckpt = load_checkpoint(ckpt_path);
  run.data = load_cache(cache);
  run.ctx = make_eval_context(run.ckpt.config, run.data, run.ckpt.norm);
  return run;
}

const std::vector<int>& pick_split(const TrainContext& ctx, const std::string& name,
                                   std::vector<int>& all_storage) {
  if (name == "train") return ctx.split.train;
  if (name == "val") return ctx.split.val;
  if (name == "test") return ctx.split.test;
  if (name == "all") {
    all_storage.clear();
    all_storage.reserve(ctx.windows.size());
    for (size_t i = 0; i < ctx.windows.size(); ++i) all_storage.push_back(static_cast<int>(i));
    return all_storage;
  }
  throw UsageError("option --split: expected train|val|test|all, got '" + name + "'");
}

}  // namespace

Config resolve_config(const Options& opts) {
  Config cfg;
  if (const std::string* p = find_opt(opts, "preset")) apply_preset(cfg, lower(trim(*p)));
  if (const std::string* f = find_opt(opts, "config")) apply_config_file(cfg, *f);
  apply_env(cfg);
  if (const std::string* s = find_opt(opts, "set")) {
    for (const std::string& pair : split(*s, ',')) {
      const std::string t = trim(pair);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw UsageError("--set expects key=value, got '" + t + "'");
      apply_kv(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
  }
  if (const std::string* v = find_opt(opts, "variant")) apply_variant(cfg, lower(trim(*v)));
  if (const std::string* s = find_opt(opts, "seed")) apply_kv(cfg, "seed", *s);
  if (const std::string* c = find_opt(opts, "category")) apply_kv(cfg, "category", *c);
  cfg.validate();
  return cfg;
}

void cmd_ingest(const Options& opts) {
  check_options(opts, {"crimes", "taxi", "pois", "graph", "tau", "start", "end",
                       "categories", "out"});
  const std::string& crimes_path = require_opt(opts, "crimes");
  const std::string& graph_path = require_opt(opts, "graph");
  const std::string& out = require_opt(opts, "out");

  IngestSpan span;
  span.start = civil_opt(opts, "start");
  span.end = civil_opt(opts, "end");
  span.tau_hours = int_opt(opts, "tau", 4);

  std::vector<std::string> categories;
  for (const std::string& c :
       split(get_or(opts, "categories", "theft,criminal_damage,battery,narcotics"), ','))
    if (!trim(c).empty()) categories.push_back(lower(trim(c)));
  if (categories.empty()) throw UsageError("option --categories: empty list");

  ensure_dir(out);
  ManifestBuilder manifest("ingest", out);
  manifest.add_input(crimes_path);
  manifest.add_input(graph_path);

  Dataset data;
  data.graph = RegionGraph::load(graph_path);

  IngestReport crime_report, taxi_report, poi_report;
  data.crimes = ingest_crimes(crimes_path, data.graph, categories, span, crime_report);
  data.features = make_feature_tensor(data.graph.num_regions(), span.total_steps());
  if (const std::string* taxi = find_opt(opts, "taxi")) {
    manifest.add_input(*taxi);
    ingest_taxi(*taxi, data.graph, span, data.features, taxi_report);
  }
  if (const std::string* pois = find_opt(opts, "pois")) {
    manifest.add_input(*pois);
    ingest_poi(*pois, data.graph, data.features, poi_report);
  }
  save_cache(data, out);

  ordered_json j;
  j["span"] = {{"start", format_civil(span.start)},
               {"end", format_civil(span.end)},
               {"tau_hours", span.tau_hours},
               {"num_steps", span.total_steps()}};
  j["num_regions"] = data.graph.num_regions();
  j["categories"] = categories;
  j["crimes"] = report_json_common(crime_report);
  j["taxi"] = report_json_common(taxi_report);
  j["pois"] = report_json_common(poi_report);
  write_text_file(out + "/ingest_report.json", j.dump(2) + "\n");

  for (const char* f : {"regions.graph", "crimes.bin", "features.bin", "tensor_meta.json",
                        "ingest_report.json"})
    manifest.add_output(out + "/" + std::string(f));
  manifest.write();
}

void cmd_synth(const Options& opts) {
  check_options(opts, {"out", "seed", "n", "months", "tau", "category", "start-year"});
  SynthSpec spec;
  const std::string& out = require_opt(opts, "out");
  spec.seed = static_cast<uint64_t>(int_opt(opts, "seed", 7));
  spec.n = int_opt(opts, "n", spec.n);
  spec.months = int_opt(opts, "months", spec.months);
  spec.tau_hours = int_opt(opts, "tau", spec.tau_hours);
  spec.category = lower(trim(get_or(opts, "category", spec.category)));
  spec.start_year = int_opt(opts, "start-year", spec.start_year);

  ensure_dir(out);
  ManifestBuilder manifest("synth", out);
  manifest.set_seed(spec.seed);
  generate_synth(spec, out);
  for (const char* f : {"crimes.csv", "taxi.csv", "pois.csv", "regions.graph",
                        "synth_meta.json"})
    manifest.add_output(out + "/" + std::string(f));
  manifest.write();
}

void cmd_train(const Options& opts) {
  check_options(opts, with_config_opts({"cache", "out"}));
  run_training_command("train", opts);
}

void cmd_ablate(const Options& opts) {
  check_options(opts, with_config_opts({"cache", "out", "variant"}));
  require_opt(opts, "variant");  // base is allowed but must be explicit
  run_training_command("ablate", opts);
}

void cmd_eval(const Options& opts) {
  check_options(opts, {"cache", "checkpoint", "split", "out"});
  const std::string& cache = require_opt(opts, "cache");
  const std::string& ckpt_path = require_opt(opts, "checkpoint");
  const std::string& out = require_opt(opts, "out");
  const std::string split_name = get_or(opts, "split", "test");

  ensure_dir(out);
  ManifestBuilder manifest("eval", out);
  add_cache_inputs(manifest, cache);
  manifest.add_input(ckpt_path);

  const CheckpointRun run = load_checkpoint_run(ckpt_path, cache);
  manifest.set_seed(run.ckpt.config.seed);
  manifest.set_config(run.ckpt.config);
  std::vector<int> all_storage;
  const std::vector<int>& idx = pick_split(run.ctx, split_name, all_storage);
  if (idx.empty()) throw DataError("split '" + split_name + "' is empty");

  std::vector<PredictionRecord> preds;
  const MetricReport rep = evaluate(run.ctx, run.ckpt.params, idx, &preds);

  std::string csv = "instance_id,region_id,category,target_step,y_true,y_pred,y_norm\n";
  for (size_t s = 0; s < preds.size(); ++s) {
    const PredictionRecord& p = preds[s];
    csv += std::to_string(idx[s]) + ',' + std::to_string(p.region_id) + ',' +
           run.data.crimes.categories[static_cast<size_t>(p.category)] + ',' +
           std::to_string(p.target_step) + ',' + format_double(p.y_true) + ',' +
           format_double(p.y_denorm) + ',' + format_double(p.y_norm) + '\n';
  }
  write_text_file(out + "/predictions.csv", csv);

  ordered_json j;
  j["config"] = config_json(run.ckpt.config);
  j["split"] = split_name;
  j["metrics"] = metric_json(rep);
  write_text_file(out + "/metrics.json", j.dump(2) + "\n");

  manifest.add_output(out + "/predictions.csv");
  manifest.add_output(out + "/metrics.json");
  manifest.write();
}

void cmd_explain(const Options& opts) {
  check_options(opts, {"cache", "checkpoint", "out", "samples"});
  const std::string& cache = require_opt(opts, "cache");
  const std::string& ckpt_path = require_opt(opts, "checkpoint");
  const std::string& out = require_opt(opts, "out");
  const int samples = int_opt(opts, "samples", 200);
  if (samples < 1) throw UsageError("option --samples must be >= 1");

  ensure_dir(out);
  ManifestBuilder manifest("explain", out);
  add_cache_inputs(manifest, cache);
  manifest.add_input(ckpt_path);

  const CheckpointRun run = load_checkpoint_run(ckpt_path, cache);
  const Config& cfg = run.ckpt.config;
  manifest.set_seed(cfg.seed);
  manifest.set_config(cfg);

  // Deterministic sample of the test split, reported in chronological order.
  std::vector<int> idx = run.ctx.split.test;
  if (static_cast<int>(idx.size()) > samples) {
    Rng rng = rng_for(cfg.seed, "explain");
    rng.shuffle(idx);
    idx.resize(static_cast<size_t>(samples));
    std::sort(idx.begin(), idx.end());
  }
  if (idx.empty()) throw DataError("test split is empty");

  std::vector<PredictionRecord> preds;
  std::vector<AttentionTrace> traces;
  evaluate(run.ctx, run.ckpt.params, idx, &preds, &traces);

  const RegionGraph& graph = run.data.graph;
  const int num_regions = graph.num_regions();
  const int num_features = run.data.num_features();
  const bool fgat = cfg.feature_mode == FeatureMode::kFgat;

  std::vector<double> region_rows;   // instances x num_regions, mean |phi| per region
  std::vector<double> feature_rows;  // instances x num_features
  std::vector<double> trend_rows;    // instances x enabled streams
  std::vector<std::string> stream_labels;
  for (const StreamTrace& st : traces.front().streams) stream_labels.push_back(st.name);

  ordered_json attn = ordered_json::array();
  for (size_t s = 0; s < traces.size(); ++s) {
    const AttentionTrace& trace = traces[s];
    std::vector<double> region_phi(static_cast<size_t>(num_regions), 0.0);
    std::vector<double> region_alpha(static_cast<size_t>(num_regions), 0.0);
    std::vector<double> feature_phi(static_cast<size_t>(num_features), 0.0);
    int64_t steps = 0;
    for (const StreamTrace& st : trace.streams) {
      for (const StepTrace& tr : st.steps) {
        ++steps;
        for (const RegionContribution& rc : region_contribution(tr, run.ckpt.params)) {
          region_phi[static_cast<size_t>(graph.index_of(rc.region_id))] += rc.norm;
        }
        for (size_t n = 0; n < tr.neighbor_ids.size(); ++n) {
          region_alpha[static_cast<size_t>(graph.index_of(tr.neighbor_ids[n]))] +=
              tr.alpha[n];
        }
        if (fgat) {
          for (const FeatureContribution& fc : feature_contribution(tr, run.ckpt.params))
            feature_phi[static_cast<size_t>(fc.feature)] += fc.norm;
        }
      }
    }
    for (auto& v : region_phi) v /= static_cast<double>(steps);
    for (auto& v : region_alpha) v /= static_cast<double>(steps);
    for (auto& v : feature_phi) v /= static_cast<double>(steps);
    region_rows.insert(region_rows.end(), region_phi.begin(), region_phi.end());
    if (fgat) feature_rows.insert(feature_rows.end(), feature_phi.begin(), feature_phi.end());

    const std::vector<TrendContribution> trend =
        trend_contribution(trace, run.ckpt.params);
    for (const TrendContribution& tc : trend) trend_rows.push_back(tc.phi);

    int top_index = 0;
    for (int i = 1; i < num_regions; ++i) {
      if (region_alpha[static_cast<size_t>(i)] > region_alpha[static_cast<size_t>(top_index)])
        top_index = i;
    }
    ordered_json inst;
    inst["instance_id"] = idx[s];
    inst["region_id"] = preds[s].region_id;
    inst["target_step"] = preds[s].target_step;
    ordered_json spatial = ordered_json::object();
    for (int i = 0; i < num_regions; ++i) {
      if (region_alpha[static_cast<size_t>(i)] > 0.0)
        spatial[std::to_string(graph.id_at(i))] = region_alpha[static_cast<size_t>(i)];
    }
    inst["mean_spatial_alpha"] = spatial;
    inst["top_region_id"] = graph.id_at(top_index);
    ordered_json trend_j = ordered_json::object();
    for (size_t a = 0; a < trace.streams.size(); ++a)
      trend_j[trace.streams[a].name] = trace.trend_alpha[a];
    inst["trend_alpha"] = trend_j;
    ordered_json temporal = ordered_json::object();
    for (const StreamTrace& st : trace.streams) {
      const auto& rec = st.temporal.back();
      temporal[st.name] = rec.temporal_alpha;
    }
    inst["final_temporal_alpha"] = temporal;
    attn.push_back(inst);
  }

  const auto write_heatmap = [&](const std::string& stem, const std::vector<std::string>& cols,
                                 const std::vector<double>& rows_data) {
    std::string csv = "instance_id";
    for (const auto& c : cols) csv += ',' + c;
    csv += '\n';
    const size_t ncols = cols.size();
    for (size_t s = 0; s < idx.size(); ++s) {
      csv += std::to_string(idx[s]);
      for (size_t c = 0; c < ncols; ++c)
        csv += ',' + format_double(rows_data[s * ncols + c]);
      csv += '\n';
    }
    write_text_file(out + "/" + stem + ".csv", csv);
    svg_heatmap(out + "/" + stem + ".svg", stem, cols, rows_data, idx.size(), ncols);
    manifest.add_output(out + "/" + stem + ".csv");
    manifest.add_output(out + "/" + stem + ".svg");
  };

  std::vector<std::string> region_cols;
  for (int i = 0; i < num_regions; ++i) region_cols.push_back(std::to_string(graph.id_at(i)));
  write_heatmap("region_heatmap", region_cols, region_rows);
  if (fgat) {
    write_heatmap("feature_heatmap", run.data.features.feature_names, feature_rows);
  }
  write_heatmap("trend_heatmap", stream_labels, trend_rows);

  write_text_file(out + "/attention.json", attn.dump(2) + "\n");
  manifest.add_output(out + "/attention.json");
  manifest.write();
}

void cmd_faithfulness(const Options& opts) {
  check_options(opts, with_config_opts({"cache", "out", "lambdas"}));
  const std::string& cache = require_opt(opts, "cache");
  const std::string& out = require_opt(opts, "out");
  const Config cfg = resolve_config(opts);

  std::vector<double> lambdas;
  for (const std::string& tok : split(get_or(opts, "lambdas", "0,0.001,0.01,0.1"), ',')) {
    const std::string t = trim(tok);
    if (t.empty()) continue;
    const auto v = parse_double(t);
    if (!v || *v < 0) throw UsageError("option --lambdas: expected non-negative numbers");
    lambdas.push_back(*v);
  }
  if (lambdas.empty()) throw UsageError("option --lambdas: empty list");

  ensure_dir(out);
  ManifestBuilder manifest("faithfulness", out);
  manifest.set_seed(cfg.seed);
  manifest.set_config(cfg);
  add_cache_inputs(manifest, cache);
  if (const std::string* f = find_opt(opts, "config")) manifest.add_input(*f);

  const Dataset data = load_cache(cache);
  const TrainContext ctx = make_train_context(cfg, data);
  const FaithfulnessReport rep = run_faithfulness(ctx, lambdas);

  ordered_json j;
  j["config"] = config_json(cfg);
  j["instances"] = rep.instance_ids;
  j["base"] = {{"best_epoch", rep.base_best_epoch},
               {"best_val_mae", rep.base_best_val_mae},
               {"test", metric_json(rep.base_test)}};
  j["uniform"] = {{"best_epoch", rep.uniform_best_epoch},
                  {"best_val_mae", rep.uniform_best_val_mae},
                  {"test", metric_json(rep.uniform_test)},
                  {"mark", {{"tvd", rep.uniform_mark_tvd}, {"jsd", rep.uniform_mark_jsd}}}};
  ordered_json seeds;
  seeds["seeds"] = rep.seeds;
  ordered_json pairs = ordered_json::array();
  for (const SeedPairMetric& p : rep.seed_pairs) {
    pairs.push_back({{"seed_a", p.seed_a},
                     {"seed_b", p.seed_b},
                     {"tvd", p.mean_tvd},
                     {"jsd", p.mean_jsd}});
  }
  seeds["pairs"] = pairs;
  seeds["instance_jsd"] = rep.seed_instance_jsd;
  j["seed_band"] = seeds;
  ordered_json adv = ordered_json::array();
  const auto point_json = [](const CurvePoint& p) {
    return ordered_json{{"lambda", p.lambda},
                        {"epoch", p.epoch},
                        {"mean_tvd", p.mean_tvd},
                        {"mean_jsd", p.mean_jsd}};
  };
  for (const AdvRunReport& run : rep.adversarial) {
    ordered_json a;
    a["lambda"] = run.lambda;
    ordered_json snaps = ordered_json::array();
    for (const CurvePoint& p : run.snapshots) snaps.push_back(point_json(p));
    a["snapshots"] = snaps;
    a["selected"] = point_json(run.selected);
    a["test"] = metric_json(run.test_metrics);
    adv.push_back(a);
  }
  j["adversarial"] = adv;
  write_text_file(out + "/report.json", j.dump(2) + "\n");

  std::string curve = "instance_id,lambda,tvd,jsd\n";
  for (const AdvRunReport& run : rep.adversarial) {
    for (const InstanceMetric& m : run.per_instance) {
      curve += std::to_string(m.instance_id) + ',' + format_double(run.lambda) + ',' +
               format_double(m.tvd) + ',' + format_double(m.jsd) + '\n';
    }
  }
  write_text_file(out + "/curve.csv", curve);

  std::vector<SvgSeries> series;
  SvgSeries adv_series{"adversarial", "#c0392b", true, {}, {}};
  for (const AdvRunReport& run : rep.adversarial) {
    adv_series.x.push_back(run.selected.mean_jsd);
    adv_series.y.push_back(run.selected.mean_tvd);
  }
  series.push_back(adv_series);
  series.push_back({"uniform", "#2980b9", false, {rep.uniform_mark_jsd},
                    {rep.uniform_mark_tvd}});
  SvgSeries seed_series{"seed pairs", "#27ae60", false, {}, {}};
  for (const SeedPairMetric& p : rep.seed_pairs) {
    seed_series.x.push_back(p.mean_jsd);
    seed_series.y.push_back(p.mean_tvd);
  }
  series.push_back(seed_series);
  svg_scatter(out + "/faithfulness.svg", "attention faithfulness", "JSD", "TVD", series);

  manifest.add_output(out + "/report.json");
  manifest.add_output(out + "/curve.csv");
  manifest.add_output(out + "/faithfulness.svg");
  manifest.write();
}

void cmd_sweep(const Options& opts) {
  check_options(opts, with_config_opts({"cache", "out", "param", "values"}));
  const std::string& cache = require_opt(opts, "cache");
  const std::string& out = require_opt(opts, "out");
  const std::string& param = require_opt(opts, "param");
  const Config base_cfg = resolve_config(opts);

  // One-factor-at-a-time replay of the published search space.
  static const std::map<std::string, std::vector<std::string>> kSearchSpace = {
      {"t_recent", {"16", "20", "24", "28"}}, {"t_daily", {"12", "16", "20", "24"}},
      {"t_weekly", {"2", "3", "4", "5"}},     {"embed_f", {"6", "8", "10", "12"}},
      {"d_qk", {"36", "40", "44", "48"}},     {"hidden", {"24", "32", "40", "48"}},
      {"attn_a", {"22", "30", "38", "46"}},
  };
  std::vector<std::string> values;
  if (const std::string* v = find_opt(opts, "values")) {
    for (const std::string& tok : split(*v, ','))
      if (!trim(tok).empty()) values.push_back(trim(tok));
  } else {
    const auto it = kSearchSpace.find(param);
    if (it == kSearchSpace.end())
      throw UsageError("option --param '" + param +
                       "' has no default grid; pass --values explicitly");
    values = it->second;
  }
  if (values.empty()) throw UsageError("option --values: empty list");

  ensure_dir(out);
  ManifestBuilder manifest("sweep", out);
  manifest.set_seed(base_cfg.seed);
  manifest.set_config(base_cfg);
  add_cache_inputs(manifest, cache);
  if (const std::string* f = find_opt(opts, "config")) manifest.add_input(*f);

  const Dataset data = load_cache(cache);
  ordered_json runs = ordered_json::array();
  std::vector<double> xs, maes;
  for (const std::string& value : values) {
    Config cfg = base_cfg;
    apply_kv(cfg, param, value);
    cfg.validate();
    const TrainContext ctx = make_train_context(cfg, data);
    const TrainResult result = train(ctx);
    const MetricReport test = evaluate(ctx, result.best_params, ctx.split.test);
    runs.push_back({{"value", value},
                    {"best_epoch", result.best_epoch},
                    {"best_val_mae", result.best_val_mae},
                    {"test_mae", test.mae},
                    {"test_mse", test.mse}});
    if (const auto x = parse_double(value)) {
      xs.push_back(*x);
      maes.push_back(test.mae);
    }
  }

  ordered_json j;
  j["param"] = param;
  j["values"] = values;
  j["config"] = config_json(base_cfg);
  j["runs"] = runs;
  write_text_file(out + "/sweep.json", j.dump(2) + "\n");
  manifest.add_output(out + "/sweep.json");
  if (xs.size() == values.size()) {
    svg_scatter(out + "/sweep.svg", "sweep: " + param, param, "test MAE",
                {{"test MAE", "#8e44ad", true, xs, maes}});
    manifest.add_output(out + "/sweep.svg");
  }
  manifest.write();
}

void run_command(const std::string& command, const Options& opts) {
  if (command == "ingest") return cmd_ingest(opts);
  if (command == "synth") return cmd_synth(opts);
  if (command == "train") return cmd_train(opts);
  if (command == "eval") return cmd_eval(opts);
  if (command == "ablate") return cmd_ablate(opts);
  if (command == "explain") return cmd_explain(opts);
  if (command == "faithfulness") return cmd_faithfulness(opts);
  if (command == "sweep") return cmd_sweep(opts);
  throw UsageError("unknown command '" + command + "'");
}

}  // namespace aist
