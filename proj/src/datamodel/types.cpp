#include "rwt/datamodel/types.hpp"

#include <algorithm>
#include <cctype>

namespace rwt {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view to_string(TextClass c) {
  switch (c) {
    case TextClass::kOverlaying: return "Overlaying";
    case TextClass::kOrganic: return "Organic";
    case TextClass::kBoth: return "Both";
    case TextClass::kNone: return "None";
  }
  return "None";
}

TextClass parse_text_class(std::string_view s) {
  const std::string l = lower(s);
  if (l == "overlaying") return TextClass::kOverlaying;
  if (l == "organic" || l == "scene") return TextClass::kOrganic;
  if (l == "both") return TextClass::kBoth;
  if (l == "none") return TextClass::kNone;
  throw Error("unknown text class '" + std::string(s) + "'");
}

std::string_view to_string(BinaryClass c) {
  return c == BinaryClass::kPositive ? "positive" : "negative";
}

BinaryClass parse_binary_class(std::string_view s) {
  if (s == "positive") return BinaryClass::kPositive;
  if (s == "negative") return BinaryClass::kNegative;
  throw Error("unknown binary class '" + std::string(s) + "'");
}

std::string_view to_string(Split s) {
  return s == Split::kTrain ? "train" : "val";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  throw Error("unknown split '" + std::string(s) + "'");
}

std::string_view to_string(LabelSource s) {
  return s == LabelSource::kVote ? "vote" : "manual_review";
}

LabelSource parse_label_source(std::string_view s) {
  if (s == "vote") return LabelSource::kVote;
  if (s == "manual_review") return LabelSource::kManualReview;
  throw Error("unknown label source '" + std::string(s) + "'");
}

std::string_view to_string(ReviewState s) {
  switch (s) {
    case ReviewState::kPending: return "pending";
    case ReviewState::kResolved: return "resolved";
    case ReviewState::kNeedsReannotation: return "needs_reannotation";
  }
  return "pending";
}

ReviewState parse_review_state(std::string_view s) {
  if (s == "pending") return ReviewState::kPending;
  if (s == "resolved") return ReviewState::kResolved;
  if (s == "needs_reannotation") return ReviewState::kNeedsReannotation;
  throw Error("unknown review state '" + std::string(s) + "'");
}

const std::vector<std::string>& product_categories() {
  static const std::vector<std::string> kCategories = {
      "area_rugs",      "bedding",        "bookcases",     "cabinets",
      "chairs",         "clocks",         "curtains",      "decorative_pillows",
      "desks",          "dressers",       "kitchen_decor", "lamps",
      "mirrors",        "nightstands",    "ottomans",      "outdoor_furniture",
      "planters",       "shelving",       "sofas",         "storage_baskets",
      "tables",         "throw_blankets", "vases",         "wall_art",
      "wall_decals"};
  return kCategories;
}

bool is_product_category(std::string_view name) {
  const auto& cats = product_categories();
  return std::find(cats.begin(), cats.end(), name) != cats.end();
}

ImageTensor::ImageTensor(int height, int width, float fill)
    : height_(height), width_(width) {
  if (height <= 0 || width <= 0) {
    throw Error("image dimensions must be positive");
  }
  values_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
}

ImageTensor::ImageTensor(int height, int width, std::vector<float> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (height <= 0 || width <= 0) {
    throw Error("image dimensions must be positive");
  }
  if (values_.size() != static_cast<std::size_t>(height) * width * kChannels) {
    throw Error("image value count does not match its shape");
  }
}

bool ImageTensor::values_in_unit_range() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](float v) { return v >= 0.0f && v <= 1.0f; });
}

void ImageTensor::check_pipeline_ready() const {
  if (height_ < kMinSide || width_ < kMinSide) {
    throw Error("image is " + std::to_string(height_) + "x" +
                std::to_string(width_) + ", below the minimum side of " +
                std::to_string(kMinSide));
  }
  if (height_ % 2 != 0 || width_ % 2 != 0) {
    throw Error("image dimensions must be even");
  }
  if (!values_in_unit_range()) {
    throw Error("image values must lie in [0,1]");
  }
}

ImageTensor pad_to_even(const ImageTensor& image) {
  const int h = image.height() + image.height() % 2;
  const int w = image.width() + image.width() % 2;
  if (h == image.height() && w == image.width()) return image;
  ImageTensor out(h, w);
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < ImageTensor::kChannels; ++c)
        out.at(y, x, c) = image.at(y, x, c);
  return out;
}

ScoreMap::ScoreMap(int height, int width) : height_(height), width_(width) {
  if (height <= 0 || width <= 0) {
    throw Error("score map dimensions must be positive");
  }
  region_.assign(static_cast<std::size_t>(height) * width, 0.0f);
  affinity_.assign(region_.size(), 0.0f);
}

ScoreMap::ScoreMap(int height, int width, std::vector<float> region,
                   std::vector<float> affinity)
    : height_(height),
      width_(width),
      region_(std::move(region)),
      affinity_(std::move(affinity)) {
  if (height <= 0 || width <= 0) {
    throw Error("score map dimensions must be positive");
  }
  const auto n = static_cast<std::size_t>(height) * width;
  if (region_.size() != n || affinity_.size() != n) {
    throw Error("score map plane size does not match its shape");
  }
}

ScoreMap ScoreMap::for_image(int image_height, int image_width) {
  if (image_height % 2 != 0 || image_width % 2 != 0) {
    throw Error("score maps require even image dimensions");
  }
  return ScoreMap(image_height / 2, image_width / 2);
}

bool ScoreMap::values_in_unit_range() const {
  auto ok = [](float v) { return v >= 0.0f && v <= 1.0f; };
  return std::all_of(region_.begin(), region_.end(), ok) &&
         std::all_of(affinity_.begin(), affinity_.end(), ok);
}

void ScoreMap::clamp_unit() {
  for (auto* plane : {&region_, &affinity_})
    for (float& v : *plane) v = std::clamp(v, 0.0f, 1.0f);
}

}  // namespace rwt
