#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rwt/datamodel/types.hpp"

namespace rwt {

// Shape plus row-major float32 payload, the unit of the `.rwt` file format:
//   {"dtype":"f32","shape":[d0,d1,...]}\n<little-endian f32 payload>
struct RawTensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::size_t element_count() const;
  friend bool operator==(const RawTensor&, const RawTensor&) = default;
};

// Images serialize as [h, w, 3]; score maps as [h, w, 2] with the region
// channel at index 0.
RawTensor to_raw(const ImageTensor& image);
RawTensor to_raw(const ScoreMap& map);
ImageTensor image_from_raw(const RawTensor& raw);
ScoreMap score_map_from_raw(const RawTensor& raw);

void write_raw(std::ostream& out, const RawTensor& tensor);
RawTensor read_raw(std::istream& in);

void write_tensor(const std::filesystem::path& path, const RawTensor& tensor);
void write_tensor(const std::filesystem::path& path, const ImageTensor& image);
void write_tensor(const std::filesystem::path& path, const ScoreMap& map);
RawTensor read_tensor(const std::filesystem::path& path);

ImageTensor read_image_tensor(const std::filesystem::path& path);
ScoreMap read_score_map(const std::filesystem::path& path);

}  // namespace rwt
