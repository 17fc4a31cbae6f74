#include "rwt/annotation/aggregate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "rwt/datamodel/votes.hpp"

namespace rwt::annotation {

void AggregationConfig::validate() const {
  if (!(time_percentile_cut >= 0.0 && time_percentile_cut < 50.0)) {
    throw Error("time_percentile_cut must lie in [0, 50)");
  }
  if (min_votes < 1 || min_votes > expected_votes) {
    throw Error("min_votes must lie in [1, expected_votes]");
  }
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
    throw Error("split_ratio must lie in (0, 1)");
  }
}

InsufficientVotesError::InsufficientVotesError(const std::string& image_id,
                                               int count, int required)
    : Error("image '" + image_id + "' has " + std::to_string(count) +
            " valid votes, needs " + std::to_string(required)),
      image_id_(image_id) {}

std::vector<VoteRecord> filter_votes_by_time(std::span<const VoteRecord> votes,
                                             const AggregationConfig& cfg) {
  cfg.validate();
  if (votes.empty()) throw Error("cannot filter an empty vote set");
  std::map<int, std::vector<double>> times_by_batch;
  for (const auto& v : votes) times_by_batch[v.batch].push_back(v.vote_time_s);

  std::map<int, double> cut_by_batch;
  for (auto& [batch, times] : times_by_batch) {
    std::sort(times.begin(), times.end());
    const auto k = static_cast<std::size_t>(
        std::floor(cfg.time_percentile_cut * times.size() / 100.0));
    cut_by_batch[batch] = times[std::min(k, times.size() - 1)];
  }
  std::vector<VoteRecord> kept;
  kept.reserve(votes.size());
  for (const auto& v : votes) {
    if (!(v.vote_time_s < cut_by_batch[v.batch])) kept.push_back(v);
  }
  return kept;
}

AggregatedLabel aggregate_votes(std::span<const VoteRecord> votes,
                                const AggregationConfig& cfg) {
  if (votes.empty()) throw InsufficientVotesError("<unknown>", 0, cfg.min_votes);
  const std::string& id = votes.front().image_id;
  for (const auto& v : votes) {
    if (v.image_id != id) throw Error("votes for different images passed to aggregate_votes");
  }
  const int n = static_cast<int>(votes.size());
  if (n < cfg.min_votes) throw InsufficientVotesError(id, n, cfg.min_votes);

  std::array<int, kAllTextClasses.size()> counts{};
  for (const auto& v : votes) ++counts[static_cast<std::size_t>(v.label)];
  const auto top = std::max_element(counts.begin(), counts.end());
  const int top_count = *top;
  const auto ties = std::count(counts.begin(), counts.end(), top_count);

  AggregatedLabel out;
  out.image_id = id;
  out.total_votes = n;
  out.votes_for_winner = top_count;
  out.source = LabelSource::kVote;
  if (ties == 1) {
    out.label = kAllTextClasses[static_cast<std::size_t>(top - counts.begin())];
  } else {
    out.ambiguous = true;
  }
  return out;
}

BinaryClass binarize_label(TextClass label) {
  switch (label) {
    case TextClass::kOverlaying:
    case TextClass::kBoth:
      return BinaryClass::kPositive;
    case TextClass::kOrganic:
    case TextClass::kNone:
      return BinaryClass::kNegative;
  }
  return BinaryClass::kNegative;
}

BinaryClass binarize_label(const std::optional<TextClass>& label) {
  if (!label) throw Error("cannot binarize an UNRESOLVED label");
  return binarize_label(*label);
}

DatasetManifest aggregate_manifest(const DatasetManifest& manifest,
                                   std::span<const VoteRecord> votes,
                                   const AggregationConfig& cfg) {
  cfg.validate();
  const auto filtered =
      votes.empty() ? std::vector<VoteRecord>{} : filter_votes_by_time(votes, cfg);
  const auto by_image = group_by_image(filtered);

  DatasetManifest out;
  for (ManifestRecord r : manifest) {
    auto it = by_image.find(r.image_id);
    const std::span<const VoteRecord> mine =
        it == by_image.end() ? std::span<const VoteRecord>{}
                             : std::span<const VoteRecord>(it->second);
    r.binary_class.reset();
    try {
      if (mine.empty()) throw InsufficientVotesError(r.image_id, 0, cfg.min_votes);
      AggregatedLabel a = aggregate_votes(mine, cfg);
      if (a.label) r.binary_class = binarize_label(*a.label);
      r.aggregated = std::move(a);
      r.review_state = ReviewState::kPending;
    } catch (const InsufficientVotesError&) {
      AggregatedLabel a;
      a.image_id = r.image_id;
      a.total_votes = static_cast<int>(mine.size());
      r.aggregated = std::move(a);
      r.review_state = ReviewState::kNeedsReannotation;
    }
    out.append(std::move(r));
  }
  return out;
}

}  // namespace rwt::annotation
