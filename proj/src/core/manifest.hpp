#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "core/config.hpp"

namespace aist {

// Provenance record written next to every command's artifacts. Input/output
// digests make reruns comparable; wall-clock fields live only here so the
// data artifacts themselves stay bit-reproducible.
class ManifestBuilder {
 public:
  ManifestBuilder(std::string command, std::string out_dir);

  void set_seed(uint64_t seed) { seed_ = seed; has_seed_ = true; }
  void set_config(const Config& cfg) { config_text_ = config_to_text(cfg); }
  void add_input(const std::string& path);   // digested immediately
  void add_output(const std::string& path);  // digested at write()
  void write();                              // <out_dir>/manifest.json

 private:
  std::string command_;
  std::string out_dir_;
  uint64_t seed_ = 0;
  bool has_seed_ = false;
  std::string config_text_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;  // path -> digest (filled late)
  std::string started_;
  int64_t start_ns_ = 0;
};

}  // namespace aist
