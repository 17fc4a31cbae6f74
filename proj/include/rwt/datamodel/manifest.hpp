#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rwt/datamodel/types.hpp"

namespace rwt {

// Ordered catalog of examples keyed by a unique image_id.
class DatasetManifest {
 public:
  DatasetManifest() = default;
  explicit DatasetManifest(std::vector<ManifestRecord> records);

  // Throws if the image_id is already present.
  void append(ManifestRecord record);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const std::vector<ManifestRecord>& records() const { return records_; }
  ManifestRecord& operator[](std::size_t i) { return records_[i]; }
  const ManifestRecord& operator[](std::size_t i) const { return records_[i]; }

  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  const ManifestRecord* find(const std::string& image_id) const;
  ManifestRecord* find(const std::string& image_id);

  friend bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
    return a.records_ == b.records_;
  }

 private:
  std::vector<ManifestRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Validates record-level invariants (known category, binary class consistent
// with the aggregated label, non-negative counts).
void validate_record(const ManifestRecord& record);

nlohmann::json to_json(const AggregatedLabel& label);
AggregatedLabel aggregated_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ManifestRecord& record);
ManifestRecord record_from_json(const nlohmann::json& j);

// One compact JSON object per line, keys sorted; unset fields omitted.
std::string serialize_record(const ManifestRecord& record);
std::string serialize_manifest(const DatasetManifest& manifest);

DatasetManifest read_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(const std::string& text);
void write_manifest(const std::filesystem::path& path,
                    const DatasetManifest& manifest);

}  // namespace rwt
