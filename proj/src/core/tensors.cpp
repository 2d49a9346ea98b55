#include "core/tensors.hpp"

#include <cstring>
#include <fstream>
#include <limits>

#include "core/errors.hpp"

namespace aist {

namespace {
constexpr char kMagic[8] = {'A', 'I', 'S', 'T', 'T', 'N', 'S', '1'};
}

void Tensor3::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write tensor file: " + path);
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(dims.data()), sizeof dims);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw IoError("short write: " + path);
}

Tensor3 Tensor3::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensor file: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw DataError("not a tensor file: " + path);
  Tensor3 t;
  in.read(reinterpret_cast<char*>(t.dims.data()), sizeof t.dims);
  if (!in) throw DataError("truncated tensor header: " + path);
  for (int64_t d : t.dims)
    if (d < 0 || d > (int64_t(1) << 32)) throw DataError("bad tensor dims: " + path);
  const size_t n = static_cast<size_t>(t.dims[0] * t.dims[1] * t.dims[2]);
  t.data.resize(n);
  in.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw DataError("truncated tensor data: " + path);
  return t;
}

int CrimeTensor::category_index(const std::string& name) const {
  for (size_t k = 0; k < categories.size(); ++k)
    if (categories[k] == name) return static_cast<int>(k);
  return -1;
}

const std::vector<std::string> kPoiCategories = {
    "food",      "residence",    "travel", "arts_entertainment", "outdoors_recreation",
    "education", "nightlife",    "professional", "shops",        "event"};

std::vector<std::string> default_feature_names() {
  std::vector<std::string> names = {"F1_taxi_inflow", "F2_taxi_outflow"};
  for (size_t j = 0; j < kPoiCategories.size(); ++j)
    names.push_back("F" + std::to_string(j + 3) + "_" + kPoiCategories[j]);
  return names;
}

double NormalizationSpec::apply(double x, int k, int i) const {
  const size_t idx =
      static_cast<size_t>(k) * static_cast<size_t>(num_regions) + static_cast<size_t>(i);
  if (degenerate[idx]) return 0.0;
  return -1.0 + 2.0 * (x - min_v[idx]) / (max_v[idx] - min_v[idx]);
}

double NormalizationSpec::invert(double y, int k, int i) const {
  const size_t idx =
      static_cast<size_t>(k) * static_cast<size_t>(num_regions) + static_cast<size_t>(i);
  if (degenerate[idx]) return min_v[idx];
  return min_v[idx] + (y + 1.0) * 0.5 * (max_v[idx] - min_v[idx]);
}

NormalizationSpec fit_normalizer(const CrimeTensor& crimes, int first_step, int last_step) {
  if (first_step < 1 || last_step > crimes.num_steps || first_step > last_step)
    throw DataError("fit_normalizer: empty or out-of-range training slice");
  NormalizationSpec spec;
  spec.num_categories = static_cast<int>(crimes.categories.size());
  spec.num_regions = crimes.num_regions;
  const size_t n = static_cast<size_t>(spec.num_categories) * static_cast<size_t>(spec.num_regions);
  spec.min_v.assign(n, std::numeric_limits<double>::infinity());
  spec.max_v.assign(n, -std::numeric_limits<double>::infinity());
  spec.degenerate.assign(n, 0);
  for (int k = 0; k < spec.num_categories; ++k) {
    for (int i = 0; i < spec.num_regions; ++i) {
      const size_t idx = static_cast<size_t>(k) * static_cast<size_t>(spec.num_regions) +
                         static_cast<size_t>(i);
      for (int t = first_step - 1; t < last_step; ++t) {
        const double v = crimes.values.at(k, i, t);
        spec.min_v[idx] = std::min(spec.min_v[idx], v);
        spec.max_v[idx] = std::max(spec.max_v[idx], v);
      }
      if (spec.max_v[idx] == spec.min_v[idx]) spec.degenerate[idx] = 1;
    }
  }
  return spec;
}

Tensor3 apply_normalizer(const NormalizationSpec& spec, const CrimeTensor& crimes) {
  Tensor3 out(crimes.values.dims[0], crimes.values.dims[1], crimes.values.dims[2]);
  for (int k = 0; k < spec.num_categories; ++k)
    for (int i = 0; i < spec.num_regions; ++i)
      for (int t = 0; t < crimes.num_steps; ++t)
        out.at(k, i, t) = spec.apply(crimes.values.at(k, i, t), k, i);
  return out;
}

}  // namespace aist
