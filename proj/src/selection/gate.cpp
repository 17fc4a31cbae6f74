#include "rwt/selection/gate.hpp"

namespace rwt::selection {

void GateConfig::validate() const {
  if (!(region_threshold > 0.0 && region_threshold < 1.0)) {
    throw Error("region threshold must lie in (0, 1)");
  }
  if (!(gate_cutoff > 0.0)) throw Error("gate cutoff must be positive");
}

double region_gate_score(const ScoreMap& map, const GateConfig& cfg) {
  double sum = 0.0;
  for (float v : map.region_plane()) {
    const bool on = cfg.strict_indicator ? v > cfg.region_threshold
                                         : v >= cfg.region_threshold;
    if (on) sum += v;
  }
  const double h = 2.0 * map.height();
  const double w = 2.0 * map.width();
  return 4.0 / (h * w) * sum;
}

DatasetManifest select_candidates(const DatasetManifest& manifest,
                                  const ScoreMapSource& maps,
                                  const GateConfig& cfg) {
  cfg.validate();
  DatasetManifest out;
  for (const auto& record : manifest) {
    const auto map = maps(record);
    if (!map) throw Error("no score map for image '" + record.image_id + "'");
    ManifestRecord r = record;
    r.gate_score = region_gate_score(*map, cfg);
    if (*r.gate_score > cfg.gate_cutoff) out.append(std::move(r));
  }
  return out;
}

}  // namespace rwt::selection
