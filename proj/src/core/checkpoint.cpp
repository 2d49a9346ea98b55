#include "core/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "core/errors.hpp"

namespace aist {

namespace {

constexpr char kMagic[8] = {'A', 'I', 'S', 'T', 'C', 'K', 'P', '1'};

void put_i32(std::ofstream& out, int32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_str(std::ofstream& out, const std::string& s) {
  put_i32(out, static_cast<int32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_doubles(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

int32_t get_i32(std::ifstream& in, const std::string& path) {
  int32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw DataError("truncated checkpoint: " + path);
  return v;
}

std::string get_str(std::ifstream& in, const std::string& path) {
  const int32_t n = get_i32(in, path);
  if (n < 0 || n > (1 << 24)) throw DataError("bad string length in checkpoint: " + path);
  std::string s(static_cast<size_t>(n), '\0');
  in.read(s.data(), n);
  if (!in) throw DataError("truncated checkpoint: " + path);
  return s;
}

void get_doubles(std::ifstream& in, std::vector<double>& v, size_t n, const std::string& path) {
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw DataError("truncated checkpoint: " + path);
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof kMagic);
  put_str(out, config_to_text(ckpt.config));

  put_i32(out, ckpt.norm.num_categories);
  put_i32(out, ckpt.norm.num_regions);
  put_doubles(out, ckpt.norm.min_v);
  put_doubles(out, ckpt.norm.max_v);
  out.write(reinterpret_cast<const char*>(ckpt.norm.degenerate.data()),
            static_cast<std::streamsize>(ckpt.norm.degenerate.size()));

  put_i32(out, ckpt.params.num_groups());
  for (int i = 0; i < ckpt.params.num_groups(); ++i) {
    const ParamGroup& g = ckpt.params.group(i);
    put_str(out, g.name);
    put_i32(out, g.rows);
    put_i32(out, g.cols);
    put_i32(out, g.fan_in);
    put_doubles(out, g.data);
  }
  if (!out) throw IoError("short write: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw DataError("not a checkpoint file: " + path);

  Checkpoint ckpt;
  ckpt.config = config_from_text(get_str(in, path));

  ckpt.norm.num_categories = get_i32(in, path);
  ckpt.norm.num_regions = get_i32(in, path);
  if (ckpt.norm.num_categories < 1 || ckpt.norm.num_regions < 1)
    throw DataError("bad normalizer shape in checkpoint: " + path);
  const size_t kn = static_cast<size_t>(ckpt.norm.num_categories) *
                    static_cast<size_t>(ckpt.norm.num_regions);
  get_doubles(in, ckpt.norm.min_v, kn, path);
  get_doubles(in, ckpt.norm.max_v, kn, path);
  ckpt.norm.degenerate.resize(kn);
  in.read(reinterpret_cast<char*>(ckpt.norm.degenerate.data()),
          static_cast<std::streamsize>(kn));
  if (!in) throw DataError("truncated checkpoint: " + path);

  const int32_t ng = get_i32(in, path);
  if (ng < 1 || ng > 4096) throw DataError("bad group count in checkpoint: " + path);
  for (int32_t i = 0; i < ng; ++i) {
    const std::string name = get_str(in, path);
    const int32_t rows = get_i32(in, path);
    const int32_t cols = get_i32(in, path);
    const int32_t fan_in = get_i32(in, path);
    ckpt.params.add(name, rows, cols, fan_in);
    get_doubles(in, ckpt.params.group(name).data,
                static_cast<size_t>(rows) * static_cast<size_t>(cols), path);
  }
  return ckpt;
}

}  // namespace aist
