#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rwt {

// Base class for every recoverable domain failure. The CLI maps these to exit
// code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TextClass { kOverlaying, kOrganic, kBoth, kNone };

inline constexpr std::array<TextClass, 4> kAllTextClasses = {
    TextClass::kOverlaying, TextClass::kOrganic, TextClass::kBoth,
    TextClass::kNone};

std::string_view to_string(TextClass c);
// Accepts the canonical names plus "Scene" as an alias for Organic.
// Matching is case-insensitive.
TextClass parse_text_class(std::string_view s);

enum class BinaryClass { kPositive, kNegative };
std::string_view to_string(BinaryClass c);
BinaryClass parse_binary_class(std::string_view s);

enum class Split { kTrain, kVal };
std::string_view to_string(Split s);
Split parse_split(std::string_view s);

enum class LabelSource { kVote, kManualReview };
std::string_view to_string(LabelSource s);
LabelSource parse_label_source(std::string_view s);

enum class ReviewState { kPending, kResolved, kNeedsReannotation };
std::string_view to_string(ReviewState s);
ReviewState parse_review_state(std::string_view s);

// The 25 product categories a manifest record may belong to.
const std::vector<std::string>& product_categories();
bool is_product_category(std::string_view name);

// RGB raster with values in [0,1], stored row-major and channel-interleaved
// (index = (y * width + x) * 3 + c).
class ImageTensor {
 public:
  static constexpr int kChannels = 3;
  static constexpr int kMinSide = 32;

  ImageTensor() = default;
  ImageTensor(int height, int width, float fill = 0.0f);
  ImageTensor(int height, int width, std::vector<float> values);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return values_.empty(); }

  float& at(int y, int x, int c) { return values_[index(y, x, c)]; }
  float at(int y, int x, int c) const { return values_[index(y, x, c)]; }

  const std::vector<float>& values() const { return values_; }
  std::vector<float>& values() { return values_; }

  bool values_in_unit_range() const;
  // Throws unless both sides are >= kMinSide, even, and values are in [0,1].
  void check_pipeline_ready() const;

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }
  int height_ = 0;
  int width_ = 0;
  std::vector<float> values_;
};

// Appends one zero row and/or column so both sides become even.
ImageTensor pad_to_even(const ImageTensor& image);

// Half-resolution two-channel detector output: region and affinity planes,
// each row-major.
class ScoreMap {
 public:
  ScoreMap() = default;
  ScoreMap(int height, int width);
  ScoreMap(int height, int width, std::vector<float> region,
           std::vector<float> affinity);

  // Map sized for an image of the given (even) dimensions.
  static ScoreMap for_image(int image_height, int image_width);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t cells() const { return region_.size(); }

  float& region(int y, int x) { return region_[idx(y, x)]; }
  float region(int y, int x) const { return region_[idx(y, x)]; }
  float& affinity(int y, int x) { return affinity_[idx(y, x)]; }
  float affinity(int y, int x) const { return affinity_[idx(y, x)]; }

  const std::vector<float>& region_plane() const { return region_; }
  const std::vector<float>& affinity_plane() const { return affinity_; }
  std::vector<float>& region_plane() { return region_; }
  std::vector<float>& affinity_plane() { return affinity_; }

  bool values_in_unit_range() const;
  void clamp_unit();

  friend bool operator==(const ScoreMap&, const ScoreMap&) = default;

 private:
  std::size_t idx(int y, int x) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  int height_ = 0;
  int width_ = 0;
  std::vector<float> region_;
  std::vector<float> affinity_;
};

struct VoteRecord {
  std::string worker_id;
  std::string image_id;
  TextClass label = TextClass::kNone;
  double vote_time_s = 0.0;
  int batch = 0;

  friend bool operator==(const VoteRecord&, const VoteRecord&) = default;
};

struct AggregatedLabel {
  std::string image_id;
  std::optional<TextClass> label;  // nullopt means UNRESOLVED
  int votes_for_winner = 0;
  int total_votes = 0;
  bool ambiguous = false;
  LabelSource source = LabelSource::kVote;

  bool resolved() const { return label.has_value(); }
  friend bool operator==(const AggregatedLabel&,
                         const AggregatedLabel&) = default;
};

struct ManifestRecord {
  std::string image_id;
  std::string image_path;
  std::string category;
  std::optional<AggregatedLabel> aggregated;
  std::optional<BinaryClass> binary_class;
  std::optional<Split> split;
  std::optional<double> gate_score;
  int n_text_regions = 0;
  std::optional<std::string> score_map_path;
  ReviewState review_state = ReviewState::kPending;
  int version = 0;

  bool label_resolved() const { return aggregated && aggregated->resolved(); }
  friend bool operator==(const ManifestRecord&,
                         const ManifestRecord&) = default;
};

}  // namespace rwt
