#include "core/config.hpp"

#include <cstdlib>
#include <functional>
#include <sstream>

#include "core/errors.hpp"
#include "core/text.hpp"

namespace aist {

int Config::input_dim(int num_features) const {
  switch (feature_mode) {
    case FeatureMode::kFgat:
      return 2 * embed_f;
    case FeatureMode::kNone:
      return embed_f;
    case FeatureMode::kRawConcat:
      return embed_f + num_features;
  }
  throw ConfigError("bad feature mode");
}

void Config::validate() const {
  const auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
  };
  positive(t_recent, "t_recent");
  positive(t_daily, "t_daily");
  positive(t_weekly, "t_weekly");
  positive(embed_f, "embed_f");
  positive(d_qk, "d_qk");
  positive(hidden, "hidden");
  positive(attn_a, "attn_a");
  positive(batch, "batch");
  positive(threads, "threads");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (tau_hours < 1 || 24 % tau_hours != 0)
    throw ConfigError("tau must be a positive divisor of 24");
  if (num_streams() == 0) throw ConfigError("at least one trend stream must be enabled");
  for (const StreamConfig* s : {&recent, &daily, &weekly}) {
    if (s->k_att < 1 || s->k_top < 1 || s->trunc < 1)
      throw ConfigError("stream k_att/k_top/trunc must be >= 1");
  }
  if (lr < 0) throw ConfigError("lr must be >= 0");
  if (dropout_attn < 0 || dropout_attn >= 1 || dropout_stream < 0 || dropout_stream >= 1)
    throw ConfigError("dropout rates must lie in [0, 1)");
  if (val_frac <= 0 || val_frac >= 1) throw ConfigError("val_frac must lie in (0, 1)");
  if (split_mode == SplitMode::kFraction &&
      (train_frac <= 0 || train_frac + val_frac >= 1))
    throw ConfigError("train_frac/val_frac must leave room for a test split");
  if (train_months < 1 || train_months > 11) throw ConfigError("train_months must be 1..11");
  if (adv_epochs < 1 || adv_eval_every < 1) throw ConfigError("adversarial epochs must be >= 1");
  if (seed_variants < 2) throw ConfigError("seed_variants must be >= 2");
}

void apply_preset(Config& c, const std::string& name) {
  if (name == "paper") {
    c.preset = "paper";
    return;  // struct defaults are the Table-2 values
  }
  if (name == "desk") {
    c.preset = "desk";
    c.tau_hours = 4;
    c.t_recent = 8;
    c.t_daily = 4;
    c.t_weekly = 2;
    c.embed_f = 4;
    c.d_qk = 8;
    c.hidden = 16;
    c.attn_a = 8;
    c.batch = 16;
    // Full-scale write periods leave the short desk sequences with <= 1
    // memory entry at the final step, which degenerates every temporal
    // attention distribution; the desk preset keeps them populated.
    c.recent = {2, 2, 2};
    c.daily = {1, 2, 2};
    c.weekly = {1, 5, 1};
    c.split_mode = SplitMode::kFraction;
    return;
  }
  throw ConfigError("unknown preset: " + name);
}

void apply_variant(Config& c, const std::string& name) {
  if (name == "base" || name.empty()) return;
  if (name == "aist_g") {
    c.parent_attention = false;
    c.feature_mode = FeatureMode::kNone;
  } else if (name == "aist_h") {
    c.feature_mode = FeatureMode::kNone;
  } else if (name == "aist_f") {
    c.feature_mode = FeatureMode::kRawConcat;
  } else if (name == "aist_fp") {
    c.parent_attention = false;
    c.feature_mode = FeatureMode::kFgat;
  } else if (name == "aist_r") {
    c.use_daily = false;
    c.use_weekly = false;
  } else if (name == "aist_d") {
    c.use_weekly = false;
  } else if (name == "aist_w") {
    c.use_daily = false;
  } else if (name == "aist_l") {
    c.plain_lstm = true;
  } else {
    throw ConfigError("unknown variant: " + name);
  }
}

namespace {

int parse_int_cfg(const std::string& key, const std::string& v) {
  const auto p = parse_int(v);
  if (!p) throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
  return static_cast<int>(*p);
}

double parse_double_cfg(const std::string& key, const std::string& v) {
  const auto p = parse_double(v);
  if (!p) throw ConfigError("config key '" + key + "': expected number, got '" + v + "'");
  return *p;
}

bool parse_bool_cfg(const std::string& key, const std::string& v) {
  const std::string t = lower(trim(v));
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError("config key '" + key + "': expected boolean, got '" + v + "'");
}

std::string bool_text(bool b) { return b ? "1" : "0"; }

std::string feature_mode_text(FeatureMode m) {
  switch (m) {
    case FeatureMode::kFgat: return "fgat";
    case FeatureMode::kNone: return "none";
    case FeatureMode::kRawConcat: return "raw";
  }
  return "fgat";
}

FeatureMode feature_mode_parse(const std::string& key, const std::string& v) {
  const std::string t = lower(trim(v));
  if (t == "fgat") return FeatureMode::kFgat;
  if (t == "none") return FeatureMode::kNone;
  if (t == "raw") return FeatureMode::kRawConcat;
  throw ConfigError("config key '" + key + "': expected fgat|none|raw, got '" + v + "'");
}

std::string streams_text(const Config& c) {
  std::string s;
  if (c.use_recent) s += 'r';
  if (c.use_daily) s += 'd';
  if (c.use_weekly) s += 'w';
  return s;
}

void streams_parse(Config& c, const std::string& key, const std::string& v) {
  c.use_recent = c.use_daily = c.use_weekly = false;
  for (char ch : lower(trim(v))) {
    if (ch == 'r') c.use_recent = true;
    else if (ch == 'd') c.use_daily = true;
    else if (ch == 'w') c.use_weekly = true;
    else throw ConfigError("config key '" + key + "': streams may only contain r, d, w");
  }
  if (!c.use_recent && !c.use_daily && !c.use_weekly)
    throw ConfigError("config key '" + key + "': at least one stream required");
}

struct Key {
  std::string name;
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&)> set;
};

const std::vector<Key>& kv_keys() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    const auto add_int = [&k](const char* name, int Config::* f) {
      k.push_back({name, [f](const Config& c) { return std::to_string(c.*f); },
                   [f, name](Config& c, const std::string& v) { c.*f = parse_int_cfg(name, v); }});
    };
    const auto add_double = [&k](const char* name, double Config::* f) {
      k.push_back({name, [f](const Config& c) { return format_double(c.*f); },
                   [f, name](Config& c, const std::string& v) { c.*f = parse_double_cfg(name, v); }});
    };
    const auto add_bool = [&k](const char* name, bool Config::* f) {
      k.push_back({name, [f](const Config& c) { return bool_text(c.*f); },
                   [f, name](Config& c, const std::string& v) { c.*f = parse_bool_cfg(name, v); }});
    };
    const auto add_stream = [&k](const std::string& name, StreamConfig Config::* sc,
                                 int StreamConfig::* f) {
      k.push_back({name, [sc, f](const Config& c) { return std::to_string((c.*sc).*f); },
                   [sc, f, name](Config& c, const std::string& v) {
                     (c.*sc).*f = parse_int_cfg(name, v);
                   }});
    };
    k.push_back({"preset", [](const Config& c) { return c.preset; },
                 [](Config& c, const std::string& v) { apply_preset(c, lower(trim(v))); }});
    k.push_back({"category", [](const Config& c) { return c.category; },
                 [](Config& c, const std::string& v) { c.category = lower(trim(v)); }});
    add_int("tau", &Config::tau_hours);
    add_int("t_recent", &Config::t_recent);
    add_int("t_daily", &Config::t_daily);
    add_int("t_weekly", &Config::t_weekly);
    add_int("embed_f", &Config::embed_f);
    add_int("d_qk", &Config::d_qk);
    add_int("hidden", &Config::hidden);
    add_int("attn_a", &Config::attn_a);
    k.push_back({"streams", [](const Config& c) { return streams_text(c); },
                 [](Config& c, const std::string& v) { streams_parse(c, "streams", v); }});
    add_stream("r_k_att", &Config::recent, &StreamConfig::k_att);
    add_stream("r_k_top", &Config::recent, &StreamConfig::k_top);
    add_stream("r_trunc", &Config::recent, &StreamConfig::trunc);
    add_stream("d_k_att", &Config::daily, &StreamConfig::k_att);
    add_stream("d_k_top", &Config::daily, &StreamConfig::k_top);
    add_stream("d_trunc", &Config::daily, &StreamConfig::trunc);
    add_stream("w_k_att", &Config::weekly, &StreamConfig::k_att);
    add_stream("w_k_top", &Config::weekly, &StreamConfig::k_top);
    add_stream("w_trunc", &Config::weekly, &StreamConfig::trunc);
    add_bool("parent_attention", &Config::parent_attention);
    k.push_back({"feature_mode",
                 [](const Config& c) { return feature_mode_text(c.feature_mode); },
                 [](Config& c, const std::string& v) {
                   c.feature_mode = feature_mode_parse("feature_mode", v);
                 }});
    add_bool("plain_lstm", &Config::plain_lstm);
    add_bool("uniform_attention", &Config::uniform_attention);
    add_bool("add_provisional", &Config::add_provisional);
    add_int("batch", &Config::batch);
    add_double("lr", &Config::lr);
    add_int("epochs", &Config::epochs);
    k.push_back({"seed", [](const Config& c) { return std::to_string(c.seed); },
                 [](Config& c, const std::string& v) {
                   const auto p = parse_int(v);
                   if (!p || *p < 0) throw ConfigError("config key 'seed': expected non-negative integer");
                   c.seed = static_cast<uint64_t>(*p);
                 }});
    add_int("threads", &Config::threads);
    add_double("dropout_attn", &Config::dropout_attn);
    add_double("dropout_stream", &Config::dropout_stream);
    add_double("leaky_slope", &Config::leaky_slope);
    k.push_back({"split", [](const Config& c) {
                   return c.split_mode == SplitMode::kCalendar ? "calendar" : "fraction";
                 },
                 [](Config& c, const std::string& v) {
                   const std::string t = lower(trim(v));
                   if (t == "calendar") c.split_mode = SplitMode::kCalendar;
                   else if (t == "fraction") c.split_mode = SplitMode::kFraction;
                   else throw ConfigError("config key 'split': expected calendar|fraction");
                 }});
    add_int("train_months", &Config::train_months);
    add_double("val_frac", &Config::val_frac);
    add_double("train_frac", &Config::train_frac);
    add_int("adv_epochs", &Config::adv_epochs);
    add_int("adv_eval_every", &Config::adv_eval_every);
    add_double("jsd_select_threshold", &Config::jsd_select_threshold);
    add_int("seed_variants", &Config::seed_variants);
    return k;
  }();
  return keys;
}

}  // namespace

void apply_kv(Config& c, const std::string& key, const std::string& value) {
  for (const auto& k : kv_keys()) {
    if (key == k.name) {
      k.set(c, value);
      return;
    }
  }
  throw ConfigError("unknown config key: " + key);
}

void apply_config_file(Config& c, const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    apply_kv(c, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

void apply_env(Config& c) {
  for (const auto& k : kv_keys()) {
    std::string env_name = "AIST_";
    for (char p : k.name)
      env_name += static_cast<char>(std::toupper(static_cast<unsigned char>(p)));
    if (const char* v = std::getenv(env_name.c_str())) k.set(c, v);
  }
}

std::string config_to_text(const Config& c) {
  std::string out;
  for (const auto& k : kv_keys()) {
    out += k.name;
    out += '=';
    out += k.get(c);
    out += '\n';
  }
  return out;
}

Config config_from_text(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("bad embedded config line: " + t);
    const std::string key = trim(t.substr(0, eq));
    // 'preset' is stored for provenance only; re-applying it would clobber
    // the explicit values that follow.
    if (key == "preset") {
      c.preset = trim(t.substr(eq + 1));
      continue;
    }
    apply_kv(c, key, trim(t.substr(eq + 1)));
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> config_items(const Config& c) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : kv_keys()) out.emplace_back(k.name, k.get(c));
  return out;
}

}  // namespace aist
