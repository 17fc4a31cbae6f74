#include "rwt/datamodel/manifest.hpp"

#include <fstream>
#include <sstream>

namespace rwt {

using nlohmann::json;

DatasetManifest::DatasetManifest(std::vector<ManifestRecord> records) {
  records_.reserve(records.size());
  for (auto& r : records) append(std::move(r));
}

void DatasetManifest::append(ManifestRecord record) {
  if (index_.count(record.image_id) != 0) {
    throw Error("duplicate image_id '" + record.image_id + "'");
  }
  index_.emplace(record.image_id, records_.size());
  records_.push_back(std::move(record));
}

const ManifestRecord* DatasetManifest::find(const std::string& image_id) const {
  auto it = index_.find(image_id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

ManifestRecord* DatasetManifest::find(const std::string& image_id) {
  auto it = index_.find(image_id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

void validate_record(const ManifestRecord& r) {
  if (r.image_id.empty()) throw Error("record has an empty image_id");
  if (!is_product_category(r.category)) {
    throw Error("record '" + r.image_id + "' has unknown category '" +
                r.category + "'");
  }
  if (r.binary_class.has_value() != r.label_resolved()) {
    throw Error("record '" + r.image_id +
                "': binary_class must be set iff the label is resolved");
  }
  if (r.binary_class) {
    const auto l = *r.aggregated->label;
    const bool pos = l == TextClass::kOverlaying || l == TextClass::kBoth;
    if (*r.binary_class != (pos ? BinaryClass::kPositive : BinaryClass::kNegative)) {
      throw Error("record '" + r.image_id + "': binary_class disagrees with the label");
    }
  }
  if (r.aggregated) {
    const auto& a = *r.aggregated;
    if (a.ambiguous && a.label) {
      throw Error("record '" + r.image_id +
                  "': ambiguous labels must be unresolved");
    }
    if (a.votes_for_winner < 0 || a.total_votes < a.votes_for_winner) {
      throw Error("record '" + r.image_id + "': inconsistent vote counts");
    }
  }
  if (r.gate_score && *r.gate_score < 0.0) {
    throw Error("record '" + r.image_id + "': negative gate_score");
  }
  if (r.n_text_regions < 0) {
    throw Error("record '" + r.image_id + "': negative n_text_regions");
  }
  if (r.version < 0) {
    throw Error("record '" + r.image_id + "': negative version");
  }
}

json to_json(const AggregatedLabel& a) {
  json j;
  j["image_id"] = a.image_id;
  j["label"] = a.label ? std::string(to_string(*a.label)) : "UNRESOLVED";
  j["votes_for_winner"] = a.votes_for_winner;
  j["total_votes"] = a.total_votes;
  j["ambiguous"] = a.ambiguous;
  j["source"] = std::string(to_string(a.source));
  return j;
}

AggregatedLabel aggregated_from_json(const json& j) {
  AggregatedLabel a;
  a.image_id = j.at("image_id").get<std::string>();
  const auto label = j.at("label").get<std::string>();
  if (label != "UNRESOLVED") a.label = parse_text_class(label);
  a.votes_for_winner = j.at("votes_for_winner").get<int>();
  a.total_votes = j.at("total_votes").get<int>();
  a.ambiguous = j.at("ambiguous").get<bool>();
  a.source = parse_label_source(j.at("source").get<std::string>());
  return a;
}

json to_json(const ManifestRecord& r) {
  json j;
  j["image_id"] = r.image_id;
  j["image_path"] = r.image_path;
  j["category"] = r.category;
  if (r.aggregated) j["aggregated"] = to_json(*r.aggregated);
  if (r.binary_class) j["binary_class"] = std::string(to_string(*r.binary_class));
  if (r.split) j["split"] = std::string(to_string(*r.split));
  if (r.gate_score) j["gate_score"] = *r.gate_score;
  j["n_text_regions"] = r.n_text_regions;
  if (r.score_map_path) j["score_map_path"] = *r.score_map_path;
  j["review"] = {{"state", std::string(to_string(r.review_state))},
                 {"version", r.version}};
  return j;
}

ManifestRecord record_from_json(const json& j) {
  if (!j.is_object()) throw Error("record is not a JSON object");
  ManifestRecord r;
  r.image_id = j.at("image_id").get<std::string>();
  r.image_path = j.at("image_path").get<std::string>();
  r.category = j.at("category").get<std::string>();
  if (j.contains("aggregated")) r.aggregated = aggregated_from_json(j["aggregated"]);
  if (j.contains("binary_class"))
    r.binary_class = parse_binary_class(j["binary_class"].get<std::string>());
  if (j.contains("split")) r.split = parse_split(j["split"].get<std::string>());
  if (j.contains("gate_score")) r.gate_score = j["gate_score"].get<double>();
  r.n_text_regions = j.value("n_text_regions", 0);
  if (j.contains("score_map_path"))
    r.score_map_path = j["score_map_path"].get<std::string>();
  if (j.contains("review")) {
    const auto& rv = j["review"];
    r.review_state = parse_review_state(rv.value("state", "pending"));
    r.version = rv.value("version", 0);
  }
  validate_record(r);
  return r;
}

std::string serialize_record(const ManifestRecord& record) {
  return to_json(record).dump();
}

std::string serialize_manifest(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& r : manifest) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

DatasetManifest parse_manifest(const std::string& text) {
  DatasetManifest manifest;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      manifest.append(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw Error("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return manifest;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open manifest '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

void write_manifest(const std::filesystem::path& path,
                    const DatasetManifest& manifest) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  // Write-then-rename so readers never observe a half-written manifest.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write manifest '" + path.string() + "'");
    out << serialize_manifest(manifest);
    if (!out) throw Error("failed writing manifest '" + path.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace rwt
