#include "rwt/datamodel/image_io.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace rwt {

namespace {

cv::Mat to_bgr8(const ImageTensor& image) {
  cv::Mat mat(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(image.at(y, x, c), 0.0f, 1.0f);
        row[x][2 - c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
  }
  return mat;
}

}  // namespace

ImageTensor load_image(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (mat.empty()) throw Error("cannot decode image '" + path.string() + "'");
  ImageTensor image(mat.rows, mat.cols);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < mat.cols; ++x)
      for (int c = 0; c < 3; ++c)
        image.at(y, x, c) = static_cast<float>(row[x][2 - c]) / 255.0f;
  }
  return image;
}

void save_image(const std::filesystem::path& path, const ImageTensor& image) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), to_bgr8(image))) {
    throw Error("cannot write image '" + path.string() + "'");
  }
}

std::vector<std::uint8_t> encode_png(const ImageTensor& image) {
  std::vector<std::uint8_t> bytes;
  if (!cv::imencode(".png", to_bgr8(image), bytes)) {
    throw Error("PNG encoding failed");
  }
  return bytes;
}

}  // namespace rwt
