#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rwt/datamodel/manifest.hpp"
#include "rwt/datamodel/types.hpp"

namespace rwt::annotation {

struct AggregationConfig {
  double time_percentile_cut = 5.0;  // percent, in [0, 50)
  int min_votes = 3;
  int expected_votes = 5;
  double split_ratio = 0.75;
  std::uint64_t split_seed = 0;

  void validate() const;
};

// Raised when an image keeps fewer than min_votes votes; such images are
// sent back for re-annotation.
class InsufficientVotesError : public Error {
 public:
  InsufficientVotesError(const std::string& image_id, int count, int required);
  const std::string& image_id() const { return image_id_; }

 private:
  std::string image_id_;
};

// Drops, per batch, the votes strictly faster than that batch's percentile
// vote time. The percentile value is the sorted time at zero-based index
// floor(p * n / 100), so at most floor(p * n / 100) votes go and equal times
// are never split. Input order is preserved.
std::vector<VoteRecord> filter_votes_by_time(std::span<const VoteRecord> votes,
                                             const AggregationConfig& cfg);

// Strict-plurality majority vote. Without a unique top label the result is
// ambiguous and UNRESOLVED.
AggregatedLabel aggregate_votes(std::span<const VoteRecord> votes_for_image,
                                const AggregationConfig& cfg);

// Overlaying and Both are positive; Organic and None are negative.
BinaryClass binarize_label(TextClass label);
BinaryClass binarize_label(const std::optional<TextClass>& label);

// Filters vote times, then aggregates and binarises every manifest record.
// Records left with too few votes are flagged needs_reannotation.
DatasetManifest aggregate_manifest(const DatasetManifest& manifest,
                                   std::span<const VoteRecord> votes,
                                   const AggregationConfig& cfg);

}  // namespace rwt::annotation
