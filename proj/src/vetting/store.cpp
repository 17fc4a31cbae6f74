#include "rwt/vetting/store.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <numeric>

#include "rwt/annotation/aggregate.hpp"

namespace rwt::vetting {

std::string_view to_string(ReviewAction a) {
  switch (a) {
    case ReviewAction::kAccept: return "accept";
    case ReviewAction::kRelabel: return "relabel";
    case ReviewAction::kRejectForReannotation: return "reject_for_reannotation";
  }
  return "?";
}

ReviewAction parse_review_action(std::string_view s) {
  if (s == "accept") return ReviewAction::kAccept;
  if (s == "relabel") return ReviewAction::kRelabel;
  if (s == "reject_for_reannotation" || s == "reject") {
    return ReviewAction::kRejectForReannotation;
  }
  throw Error("unknown review action '" + std::string(s) + "'");
}

void ReviewDecision::validate() const {
  if (image_id.empty()) throw Error("decision lacks an image_id");
  if (prior_version < 0) throw Error("prior_version must be non-negative");
  if (action == ReviewAction::kRelabel && !label) {
    throw Error("relabel requires a label");
  }
  if (action != ReviewAction::kRelabel && label) {
    throw Error("only relabel carries a label");
  }
}

nlohmann::json to_json(const ReviewDecision& d) {
  nlohmann::json j = {{"image_id", d.image_id},
                      {"action", to_string(d.action)},
                      {"reviewer", d.reviewer},
                      {"timestamp", d.timestamp},
                      {"prior_version", d.prior_version}};
  if (d.label) j["label"] = to_string(*d.label);
  return j;
}

ReviewDecision decision_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("decision must be a JSON object");
  try {
    ReviewDecision d;
    d.image_id = j.value("image_id", "");
    d.action = parse_review_action(j.at("action").get<std::string>());
    if (j.contains("label") && !j.at("label").is_null()) {
      d.label = parse_text_class(j.at("label").get<std::string>());
    }
    d.reviewer = j.value("reviewer", "");
    d.timestamp = j.value("timestamp", "");
    d.prior_version = j.at("prior_version").get<int>();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed decision: ") + e.what());
  }
}

std::string utc_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string_view to_string(StatusFilter f) {
  switch (f) {
    case StatusFilter::kAmbiguous: return "ambiguous";
    case StatusFilter::kPending: return "pending";
    case StatusFilter::kResolved: return "resolved";
    case StatusFilter::kReannotate: return "reannotate";
  }
  return "?";
}

StatusFilter parse_status_filter(std::string_view s) {
  if (s == "ambiguous") return StatusFilter::kAmbiguous;
  if (s == "pending") return StatusFilter::kPending;
  if (s == "resolved") return StatusFilter::kResolved;
  if (s == "reannotate" || s == "needs_reannotation") return StatusFilter::kReannotate;
  throw Error("invalid status filter '" + std::string(s) + "'");
}

bool matches(const ManifestRecord& r, StatusFilter f) {
  switch (f) {
    case StatusFilter::kAmbiguous:
      return r.review_state == ReviewState::kPending && r.aggregated && r.aggregated->ambiguous;
    case StatusFilter::kPending: return r.review_state == ReviewState::kPending;
    case StatusFilter::kResolved: return r.review_state == ReviewState::kResolved;
    case StatusFilter::kReannotate: return r.review_state == ReviewState::kNeedsReannotation;
  }
  return false;
}

UnknownExampleError::UnknownExampleError(const std::string& image_id)
    : Error("unknown image_id '" + image_id + "'") {}

VersionConflictError::VersionConflictError(const ManifestRecord& current, int prior_version)
    : Error("version conflict on '" + current.image_id + "': decision made against version " +
            std::to_string(prior_version) + ", record is at version " +
            std::to_string(current.version)),
      current_(current) {}

void apply_decision(ManifestRecord& record, const ReviewDecision& d) {
  d.validate();
  if (d.image_id != record.image_id) {
    throw Error("decision for '" + d.image_id + "' applied to '" + record.image_id + "'");
  }
  if (d.prior_version != record.version) throw VersionConflictError(record, d.prior_version);
  switch (d.action) {
    case ReviewAction::kRelabel: {
      AggregatedLabel agg = record.aggregated.value_or(AggregatedLabel{});
      agg.image_id = record.image_id;
      agg.label = *d.label;
      agg.ambiguous = false;
      agg.source = LabelSource::kManualReview;
      record.aggregated = agg;
      record.binary_class = annotation::binarize_label(*d.label);
      record.review_state = ReviewState::kResolved;
      break;
    }
    case ReviewAction::kAccept:
      if (!record.label_resolved()) {
        throw Error("cannot accept '" + record.image_id + "': its label is unresolved");
      }
      record.review_state = ReviewState::kResolved;
      break;
    case ReviewAction::kRejectForReannotation:
      record.review_state = ReviewState::kNeedsReannotation;
      break;
  }
  ++record.version;
}

DatasetManifest replay(DatasetManifest manifest, std::span<const ReviewDecision> log) {
  for (const auto& d : log) {
    auto* r = manifest.find(d.image_id);
    if (!r) throw UnknownExampleError(d.image_id);
    apply_decision(*r, d);
  }
  return manifest;
}

std::vector<ReviewDecision> read_audit_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read audit log '" + path.string() + "'");
  std::vector<ReviewDecision> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(decision_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error("audit log line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

VettingStore::VettingStore(DatasetManifest initial, std::filesystem::path audit_log,
                           std::optional<std::filesystem::path> manifest_out)
    : audit_path_(std::move(audit_log)), manifest_out_(std::move(manifest_out)) {
  if (std::filesystem::exists(audit_path_)) log_ = read_audit_log(audit_path_);
  manifest_ = replay(std::move(initial), log_);
  order_.resize(manifest_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    return manifest_[a].image_id < manifest_[b].image_id;
  });
  if (audit_path_.has_parent_path()) std::filesystem::create_directories(audit_path_.parent_path());
  persist_manifest();
}

Page VettingStore::list(StatusFilter filter, int page, int page_size) const {
  if (page < 1) throw Error("page must be >= 1");
  if (page_size < 1) throw Error("page_size must be >= 1");
  std::shared_lock lock(mu_);
  Page out;
  out.page = page;
  out.page_size = page_size;
  const std::size_t first = static_cast<std::size_t>(page - 1) * page_size;
  for (std::size_t i : order_) {
    const auto& r = manifest_[i];
    if (!matches(r, filter)) continue;
    if (out.total >= first && out.items.size() < static_cast<std::size_t>(page_size)) {
      out.items.push_back(r);
    }
    ++out.total;
  }
  out.pages = static_cast<int>((out.total + page_size - 1) / page_size);
  return out;
}

ManifestRecord VettingStore::get(const std::string& image_id) const {
  std::shared_lock lock(mu_);
  const auto* r = manifest_.find(image_id);
  if (!r) throw UnknownExampleError(image_id);
  return *r;
}

ManifestRecord VettingStore::submit(ReviewDecision d) {
  if (d.timestamp.empty()) d.timestamp = utc_timestamp_now();
  std::unique_lock lock(mu_);
  auto* r = manifest_.find(d.image_id);
  if (!r) throw UnknownExampleError(d.image_id);
  ManifestRecord updated = *r;
  apply_decision(updated, d);
  {
    std::ofstream out(audit_path_, std::ios::app | std::ios::binary);
    if (!out) throw Error("cannot append to audit log '" + audit_path_.string() + "'");
    out << to_json(d).dump() << '\n';
    out.flush();
    if (!out) throw Error("failed appending to audit log '" + audit_path_.string() + "'");
  }
  log_.push_back(d);
  *r = updated;
  persist_manifest();
  return updated;
}

DatasetManifest VettingStore::snapshot() const {
  std::shared_lock lock(mu_);
  return manifest_;
}

std::vector<ReviewDecision> VettingStore::log() const {
  std::shared_lock lock(mu_);
  return log_;
}

void VettingStore::persist_manifest() const {
  if (manifest_out_) write_manifest(*manifest_out_, manifest_);
}

}  // namespace rwt::vetting
