#pragma once

#include "rwt/annotation/aggregate.hpp"

namespace rwt::annotation {

// Stratified train/val assignment. The train total is round(ratio * n); each
// binary class receives its proportional share, with leftover slots going to
// the classes with the largest fractional remainders. Deterministic for a
// fixed split_seed. Throws if any record lacks a binary class.
DatasetManifest split_dataset(const DatasetManifest& manifest,
                              const AggregationConfig& cfg);

}  // namespace rwt::annotation
