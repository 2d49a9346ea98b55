#include "core/manifest.hpp"

#include <chrono>
#include <ctime>

#include <json.hpp>

#include "core/sha.hpp"
#include "core/text.hpp"
#include "core/version.hpp"

namespace aist {

namespace {

std::string now_civil() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  CivilTime c;
  c.year = tm.tm_year + 1900;
  c.month = tm.tm_mon + 1;
  c.day = tm.tm_mday;
  c.hour = tm.tm_hour;
  c.minute = tm.tm_min;
  c.second = tm.tm_sec;
  return format_civil(c) + "Z";
}

int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

ManifestBuilder::ManifestBuilder(std::string command, std::string out_dir)
    : command_(std::move(command)),
      out_dir_(std::move(out_dir)),
      started_(now_civil()),
      start_ns_(now_ns()) {}

void ManifestBuilder::add_input(const std::string& path) {
  inputs_[path] = sha256_file(path);
}

void ManifestBuilder::add_output(const std::string& path) { outputs_[path] = ""; }

void ManifestBuilder::write() {
  nlohmann::ordered_json j;
  j["command"] = command_;
  j["version"] = kVersion;
  if (has_seed_) j["seed"] = seed_;
  if (!config_text_.empty()) j["config"] = config_text_;
  j["started"] = started_;
  j["elapsed_sec"] =
      static_cast<double>(now_ns() - start_ns_) / 1e9;
  nlohmann::ordered_json in = nlohmann::ordered_json::object();
  for (const auto& [p, d] : inputs_) in[p] = d;
  j["inputs"] = in;
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (auto& [p, d] : outputs_) {
    d = sha256_file(p);
    out[p] = d;
  }
  j["outputs"] = out;
  write_text_file(out_dir_ + "/manifest.json", j.dump(2) + "\n");
}

}  // namespace aist
