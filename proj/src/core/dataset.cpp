#include "core/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/text.hpp"

namespace aist {

namespace fs = std::filesystem;
using nlohmann::json;

void save_cache(const Dataset& data, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create cache dir " + dir + ": " + ec.message());

  data.graph.save(dir + "/regions.graph");
  data.crimes.values.save(dir + "/crimes.bin");
  data.features.values.save(dir + "/features.bin");

  json meta;
  meta["categories"] = data.crimes.categories;
  meta["tau_hours"] = data.crimes.tau_hours;
  meta["origin"] = format_civil(data.crimes.origin);
  meta["num_steps"] = data.crimes.num_steps;
  meta["num_regions"] = data.crimes.num_regions;
  meta["region_ids"] = data.graph.ids();
  meta["feature_names"] = data.features.feature_names;
  write_text_file(dir + "/tensor_meta.json", meta.dump(2) + "\n");
}

Dataset load_cache(const std::string& dir) {
  json meta;
  try {
    meta = json::parse(read_text_file(dir + "/tensor_meta.json"));
  } catch (const json::exception& e) {
    throw DataError("bad tensor_meta.json in " + dir + ": " + e.what());
  }

  Dataset data;
  data.graph = RegionGraph::load(dir + "/regions.graph");
  try {
    data.crimes.categories = meta.at("categories").get<std::vector<std::string>>();
    data.crimes.tau_hours = meta.at("tau_hours").get<int>();
    data.crimes.num_steps = meta.at("num_steps").get<int>();
    data.crimes.num_regions = meta.at("num_regions").get<int>();
    const auto origin = parse_civil(meta.at("origin").get<std::string>());
    if (!origin) throw DataError("bad origin timestamp in tensor_meta.json");
    data.crimes.origin = *origin;
    const auto region_ids = meta.at("region_ids").get<std::vector<int>>();
    if (region_ids != data.graph.ids())
      throw DataError("tensor_meta.json region_ids disagree with regions.graph in " + dir);
    data.features.feature_names = meta.at("feature_names").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError("bad tensor_meta.json in " + dir + ": " + e.what());
  }

  data.crimes.values = Tensor3::load(dir + "/crimes.bin");
  data.features.values = Tensor3::load(dir + "/features.bin");

  const auto k = static_cast<int64_t>(data.crimes.categories.size());
  const auto n = static_cast<int64_t>(data.crimes.num_regions);
  const auto t = static_cast<int64_t>(data.crimes.num_steps);
  if (data.crimes.values.dims != std::array<int64_t, 3>{k, n, t})
    throw DataError("crimes.bin dims disagree with tensor_meta.json in " + dir);
  const auto j = static_cast<int64_t>(data.features.feature_names.size());
  if (data.features.values.dims != std::array<int64_t, 3>{j, n, t})
    throw DataError("features.bin dims disagree with tensor_meta.json in " + dir);
  if (data.graph.num_regions() != data.crimes.num_regions)
    throw DataError("regions.graph region count disagrees with tensors in " + dir);
  return data;
}

std::vector<SampleWindow> build_windows(const Config& cfg, const Dataset& data, int category,
                                        WindowReport* report) {
  if (category < 0 || category >= static_cast<int>(data.crimes.categories.size()))
    throw DataError("category index out of range");
  const int m = cfg.steps_per_day();
  const int num_steps = data.crimes.num_steps;
  const int n = data.crimes.num_regions;

  // Oldest step any stream reaches back to, for target step s:
  //   recent: s - t_recent; daily: s - t_daily*m; weekly: s - t_weekly*7*m.
  int reach = cfg.use_recent ? cfg.t_recent : 0;
  if (cfg.use_daily) reach = std::max(reach, cfg.t_daily * m);
  if (cfg.use_weekly) reach = std::max(reach, cfg.t_weekly * 7 * m);
  if (reach <= 0) throw ConfigError("no streams enabled");

  std::vector<SampleWindow> out;
  WindowReport rep;
  for (int s = 1; s <= num_steps; ++s) {
    if (s - reach < 1) {
      rep.skipped_insufficient_history += n;
      continue;
    }
    for (int i = 0; i < n; ++i) {
      SampleWindow w;
      w.region_index = i;
      w.category = category;
      w.target_step = s;
      if (cfg.use_recent) {
        w.recent.reserve(static_cast<size_t>(cfg.t_recent));
        for (int d = cfg.t_recent; d >= 1; --d) w.recent.push_back(s - d);
      }
      if (cfg.use_daily) {
        w.daily.reserve(static_cast<size_t>(cfg.t_daily));
        for (int d = cfg.t_daily; d >= 1; --d) w.daily.push_back(s - d * m);
      }
      if (cfg.use_weekly) {
        w.weekly.reserve(static_cast<size_t>(cfg.t_weekly));
        for (int d = cfg.t_weekly; d >= 1; --d) w.weekly.push_back(s - d * 7 * m);
      }
      w.y_raw = data.crimes.values.at(category, i, s - 1);
      out.push_back(std::move(w));
      ++rep.emitted;
    }
  }
  if (report) *report = rep;
  return out;
}

namespace {

// First step label whose bin ends after the given instant; windows with
// target_step <= this belong to the months before `boundary`.
int64_t last_step_at_or_before(const CrimeTensor& crimes, const CivilTime& boundary) {
  const int64_t diff = civil_to_seconds(boundary) - civil_to_seconds(crimes.origin);
  const int64_t tau_sec = static_cast<int64_t>(crimes.tau_hours) * 3600;
  if (diff < 0) return 0;
  return diff / tau_sec;  // bin b ends at origin + b*tau
}

void advance_to_step_boundary(const std::vector<SampleWindow>& w,
                              const std::vector<int>& order, size_t& cut) {
  while (cut > 0 && cut < order.size() &&
         w[static_cast<size_t>(order[cut])].target_step ==
             w[static_cast<size_t>(order[cut - 1])].target_step)
    ++cut;
}

}  // namespace

SplitIndices split_dataset(const std::vector<SampleWindow>& windows, const Config& cfg,
                           const Dataset& data) {
  if (windows.empty()) throw DataError("no sample windows to split");
  std::vector<int> order(windows.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& wa = windows[static_cast<size_t>(a)];
    const auto& wb = windows[static_cast<size_t>(b)];
    if (wa.target_step != wb.target_step) return wa.target_step < wb.target_step;
    return wa.region_index < wb.region_index;
  });

  SplitIndices split;
  if (cfg.split_mode == SplitMode::kCalendar) {
    const auto& origin = data.crimes.origin;
    const int total_months = origin.year * 12 + (origin.month - 1) + cfg.train_months;
    CivilTime boundary{};
    boundary.year = total_months / 12;
    boundary.month = total_months % 12 + 1;
    boundary.day = 1;
    const int64_t boundary_step = last_step_at_or_before(data.crimes, boundary);

    std::vector<int> tail;
    for (int idx : order) {
      if (windows[static_cast<size_t>(idx)].target_step <= boundary_step)
        split.train.push_back(idx);
      else
        tail.push_back(idx);
    }
    if (split.train.empty())
      throw ConfigError("calendar split: no training windows before month " +
                        std::to_string(cfg.train_months));
    if (tail.empty())
      throw ConfigError("calendar split: data span does not extend past train_months");
    size_t val_n = static_cast<size_t>(std::floor(cfg.val_frac * static_cast<double>(tail.size())));
    if (cfg.val_frac > 0.0 && val_n == 0 && tail.size() >= 2) val_n = 1;
    if (val_n >= tail.size()) val_n = tail.size() - 1;
    split.val.assign(tail.begin(), tail.begin() + static_cast<ptrdiff_t>(val_n));
    split.test.assign(tail.begin() + static_cast<ptrdiff_t>(val_n), tail.end());
  } else {
    size_t c1 = static_cast<size_t>(
        std::llround(cfg.train_frac * static_cast<double>(order.size())));
    c1 = std::min(c1, order.size());
    advance_to_step_boundary(windows, order, c1);
    size_t c2 = c1 + static_cast<size_t>(
                         std::llround(cfg.val_frac * static_cast<double>(order.size())));
    c2 = std::min(c2, order.size());
    advance_to_step_boundary(windows, order, c2);
    if (c1 == 0 || c1 == c2 || c2 == order.size())
      throw ConfigError("fraction split produces an empty partition");
    split.train.assign(order.begin(), order.begin() + static_cast<ptrdiff_t>(c1));
    split.val.assign(order.begin() + static_cast<ptrdiff_t>(c1),
                     order.begin() + static_cast<ptrdiff_t>(c2));
    split.test.assign(order.begin() + static_cast<ptrdiff_t>(c2), order.end());
  }
  return split;
}

CategoryView build_category_view(const Dataset& data, const NormalizationSpec& spec,
                                 int category) {
  CategoryView v;
  v.graph = &data.graph;
  v.features = &data.features.values;
  v.category = category;
  v.num_steps = data.crimes.num_steps;
  v.num_features = data.num_features();
  const int n = data.crimes.num_regions;
  v.xhat.resize(static_cast<size_t>(n) * static_cast<size_t>(v.num_steps));
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < v.num_steps; ++t)
      v.xhat[static_cast<size_t>(i) * v.num_steps + t] =
          spec.apply(data.crimes.values.at(category, i, t), category, i);
  v.z.resize(v.xhat.size());
  std::vector<double> col(static_cast<size_t>(n));
  for (int t = 0; t < v.num_steps; ++t) {
    for (int i = 0; i < n; ++i) col[static_cast<size_t>(i)] = v.xhat[static_cast<size_t>(i) * v.num_steps + t];
    const auto z = data.graph.parent_feature(col);
    for (int i = 0; i < n; ++i) v.z[static_cast<size_t>(i) * v.num_steps + t] = z[static_cast<size_t>(i)];
  }
  return v;
}

}  // namespace aist
