#include "rwt/training/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

namespace rwt::training {

namespace {

// Resizes one or more interleaved float planes. Shrinking uses area
// averaging, enlarging uses half-pixel bilinear taps.
cv::Mat resize_planes(const cv::Mat& src, int h, int w) {
  if (src.rows == h && src.cols == w) return src.clone();
  cv::Mat dst;
  const int interp = (h < src.rows || w < src.cols) ? cv::INTER_AREA : cv::INTER_LINEAR;
  cv::resize(src, dst, cv::Size(w, h), 0, 0, interp);
  return dst;
}

}  // namespace

PadGeometry pad_geometry(int height, int width, int side) {
  if (height <= 0 || width <= 0) throw Error("cannot resize a zero-area image");
  if (side <= 0) throw Error("target side must be positive");
  PadGeometry g;
  const double scale = static_cast<double>(side) / std::max(height, width);
  g.content_h = std::clamp(static_cast<int>(std::lround(height * scale)), 1, side);
  g.content_w = std::clamp(static_cast<int>(std::lround(width * scale)), 1, side);
  g.top = (side - g.content_h) / 2;
  g.left = (side - g.content_w) / 2;
  return g;
}

ImageTensor resize_and_pad(const ImageTensor& image, int target_side) {
  const PadGeometry g = pad_geometry(image.height(), image.width(), target_side);
  if (g.content_h == image.height() && g.content_w == image.width() &&
      image.height() == target_side && image.width() == target_side) {
    return image;
  }
  cv::Mat src(image.height(), image.width(), CV_32FC3,
              const_cast<float*>(image.values().data()));
  cv::Mat content = resize_planes(src, g.content_h, g.content_w);
  ImageTensor out(target_side, target_side, 0.0f);
  for (int y = 0; y < g.content_h; ++y) {
    const float* row = content.ptr<float>(y);
    for (int x = 0; x < g.content_w; ++x)
      for (int c = 0; c < 3; ++c)
        out.at(y + g.top, x + g.left, c) = std::clamp(row[x * 3 + c], 0.0f, 1.0f);
  }
  return out;
}

ScoreMap resize_and_pad(const ScoreMap& map, int target_side) {
  if (map.height() == target_side && map.width() == target_side) return map;
  const PadGeometry g = pad_geometry(map.height(), map.width(), target_side);
  ScoreMap out(target_side, target_side);
  auto place = [&](const std::vector<float>& plane, std::vector<float>& dst) {
    cv::Mat src(map.height(), map.width(), CV_32FC1, const_cast<float*>(plane.data()));
    cv::Mat content = resize_planes(src, g.content_h, g.content_w);
    for (int y = 0; y < g.content_h; ++y)
      for (int x = 0; x < g.content_w; ++x)
        dst[static_cast<std::size_t>(y + g.top) * target_side + x + g.left] =
            std::clamp(content.at<float>(y, x), 0.0f, 1.0f);
  };
  place(map.region_plane(), out.region_plane());
  place(map.affinity_plane(), out.affinity_plane());
  return out;
}

}  // namespace rwt::training
