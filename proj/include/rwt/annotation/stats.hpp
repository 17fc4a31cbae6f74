#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rwt/datamodel/manifest.hpp"

namespace rwt::annotation {

// Agreement classes over the counted votes of one image:
//   unanimous     every vote for the winner
//   majority_3_4  winner holds more than half but not all (3 or 4 of 5)
//   plurality     strict plurality without a majority (2-1-1-1 of 5)
//   ambiguous     no strict plurality
struct AgreementBreakdown {
  std::size_t unanimous = 0;
  std::size_t majority_3_4 = 0;
  std::size_t plurality = 0;
  std::size_t ambiguous = 0;

  std::size_t total() const { return unanimous + majority_3_4 + plurality + ambiguous; }
  double fraction(std::size_t count) const;
};

struct DatasetStats {
  std::vector<std::pair<std::string, std::size_t>> category_counts;  // 25 bins
  std::map<int, std::size_t> text_regions_histogram;
  std::map<int, std::size_t> winner_votes_histogram;
  AgreementBreakdown agreement;
  std::size_t total = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t train = 0;
  std::size_t val = 0;
};

// Agreement comes from raw votes where an image has any, otherwise from the
// record's aggregated counts; records with neither are not counted.
DatasetStats dataset_stats(const DatasetManifest& manifest,
                           std::span<const VoteRecord> votes);

// Plain-text agreement summary with one-decimal percentages.
std::string format_agreement_report(const DatasetStats& stats);

// Writes categories.csv, text_regions.csv, winner_votes.csv, agreement.csv,
// stats.json, and the SVG plots categories.svg and text_regions_loglog.svg.
void write_stats(const DatasetStats& stats, const std::filesystem::path& out_dir);

}  // namespace rwt::annotation
