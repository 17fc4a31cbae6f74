#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rwt/datamodel/manifest.hpp"
#include "rwt/datamodel/types.hpp"

namespace rwt::vetting {

enum class ReviewAction { kAccept, kRelabel, kRejectForReannotation };
std::string_view to_string(ReviewAction a);
// Also accepts "reject" for kRejectForReannotation.
ReviewAction parse_review_action(std::string_view s);

struct ReviewDecision {
  std::string image_id;
  ReviewAction action = ReviewAction::kAccept;
  std::optional<TextClass> label;  // set exactly when action is kRelabel
  std::string reviewer;
  std::string timestamp;  // ISO 8601 UTC
  int prior_version = 0;

  void validate() const;
  friend bool operator==(const ReviewDecision&, const ReviewDecision&) = default;
};

nlohmann::json to_json(const ReviewDecision& d);
ReviewDecision decision_from_json(const nlohmann::json& j);

std::string utc_timestamp_now();

enum class StatusFilter { kAmbiguous, kPending, kResolved, kReannotate };
std::string_view to_string(StatusFilter f);
StatusFilter parse_status_filter(std::string_view s);
// ambiguous: pending with an ambiguous vote; pending/resolved/reannotate follow
// the record's review state.
bool matches(const ManifestRecord& r, StatusFilter f);

class UnknownExampleError : public Error {
 public:
  explicit UnknownExampleError(const std::string& image_id);
};

class VersionConflictError : public Error {
 public:
  VersionConflictError(const ManifestRecord& current, int prior_version);
  const ManifestRecord& current() const { return current_; }

 private:
  ManifestRecord current_;
};

// Applies one decision to its record: relabel sets a manually reviewed label
// and resolves it, reject flags it for re-annotation, accept resolves the
// existing label. Throws VersionConflictError if prior_version is stale.
void apply_decision(ManifestRecord& record, const ReviewDecision& d);

// Folds the decisions over the manifest in log order.
DatasetManifest replay(DatasetManifest manifest, std::span<const ReviewDecision> log);

// One JSON object per line.
std::vector<ReviewDecision> read_audit_log(const std::filesystem::path& path);

struct Page {
  std::vector<ManifestRecord> items;
  std::size_t total = 0;
  int page = 1;  // 1-based
  int page_size = 0;
  int pages = 0;
};

// Manifest plus append-only decision log. Reads run concurrently; writes are
// serialized, and each decision reaches the log before the manifest changes.
class VettingStore {
 public:
  // Replays any decisions already in `audit_log` over `initial`. When
  // `manifest_out` is set, the materialized manifest is rewritten there after
  // every decision.
  VettingStore(DatasetManifest initial, std::filesystem::path audit_log,
               std::optional<std::filesystem::path> manifest_out = std::nullopt);

  Page list(StatusFilter filter, int page, int page_size) const;
  ManifestRecord get(const std::string& image_id) const;
  ManifestRecord submit(ReviewDecision d);

  DatasetManifest snapshot() const;
  std::vector<ReviewDecision> log() const;

 private:
  void persist_manifest() const;

  mutable std::shared_mutex mu_;
  DatasetManifest manifest_;
  std::vector<std::size_t> order_;  // record indices sorted by image_id
  std::vector<ReviewDecision> log_;
  std::filesystem::path audit_path_;
  std::optional<std::filesystem::path> manifest_out_;
};

}  // namespace rwt::vetting
