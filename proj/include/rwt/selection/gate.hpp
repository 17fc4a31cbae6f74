#pragma once

#include <functional>
#include <optional>
#include <string>

#include "rwt/datamodel/manifest.hpp"
#include "rwt/datamodel/types.hpp"

namespace rwt::selection {

struct GateConfig {
  double region_threshold = 0.8;  // T
  double gate_cutoff = 5e-4;      // keep images with G > cutoff
  bool strict_indicator = true;   // [F > T] rather than [F >= T]

  void validate() const;
};

// G = 4 / (h * w) * sum over all cells of F_rg * [F_rg > T], where (h, w) is
// the source image size, i.e. twice the map extents. Uses only the region
// channel; the result lies in [0, 1].
double region_gate_score(const ScoreMap& map, const GateConfig& cfg = {});

// Returns the score map for an image id, or nullopt if none is available.
using ScoreMapSource = std::function<std::optional<ScoreMap>(const ManifestRecord&)>;

// Records every record's gate score and keeps those above the cutoff, in
// input order. Throws if a record has no obtainable score map.
DatasetManifest select_candidates(const DatasetManifest& manifest,
                                  const ScoreMapSource& maps,
                                  const GateConfig& cfg = {});

}  // namespace rwt::selection
