#include "rwt/annotation/split.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace rwt::annotation {

DatasetManifest split_dataset(const DatasetManifest& manifest,
                              const AggregationConfig& cfg) {
  cfg.validate();
  std::array<std::vector<std::size_t>, 2> groups;  // positive, negative
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& r = manifest[i];
    if (!r.binary_class) {
      throw Error("cannot split: record '" + r.image_id + "' is unresolved");
    }
    groups[*r.binary_class == BinaryClass::kPositive ? 0 : 1].push_back(i);
  }

  const auto n = static_cast<double>(manifest.size());
  const auto train_total = static_cast<std::size_t>(std::llround(cfg.split_ratio * n));
  std::array<std::size_t, 2> quota{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (int g = 0; g < 2; ++g) {
    const double exact = cfg.split_ratio * static_cast<double>(groups[g].size());
    quota[g] = static_cast<std::size_t>(std::floor(exact));
    remainder[g] = exact - static_cast<double>(quota[g]);
    assigned += quota[g];
  }
  while (assigned < train_total) {
    const int g = remainder[0] >= remainder[1] ? 0 : 1;
    if (quota[g] < groups[g].size()) {
      ++quota[g];
    } else {
      ++quota[1 - g];
    }
    remainder[g] = -1.0;
    ++assigned;
  }

  std::mt19937_64 rng(cfg.split_seed);
  DatasetManifest out = manifest;
  for (int g = 0; g < 2; ++g) {
    auto& idx = groups[g];
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out[idx[k]].split = k < quota[g] ? Split::kTrain : Split::kVal;
    }
  }
  return out;
}

}  // namespace rwt::annotation
