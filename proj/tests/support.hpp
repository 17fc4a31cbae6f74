#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "rwt/datamodel/types.hpp"

namespace rwt::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("rwt_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline ImageTensor random_image(int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  ImageTensor img(h, w);
  for (auto& v : img.values()) v = u(rng);
  return img;
}

inline ScoreMap random_map(int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  ScoreMap m(h, w);
  for (auto& v : m.region_plane()) v = u(rng);
  for (auto& v : m.affinity_plane()) v = u(rng);
  return m;
}

}  // namespace rwt::test
