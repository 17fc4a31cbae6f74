#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rwt/datamodel/types.hpp"

namespace rwt {

// PNG/JPEG decoding into an RGB [0,1] tensor.
ImageTensor load_image(const std::filesystem::path& path);
// Encoding format follows the file extension (.png, .jpg, .jpeg).
void save_image(const std::filesystem::path& path, const ImageTensor& image);
std::vector<std::uint8_t> encode_png(const ImageTensor& image);

}  // namespace rwt
