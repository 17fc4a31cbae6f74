#pragma once

#include <cstdint>
#include <span>

namespace rwt::evaluation {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
  std::int64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// A score at or above the threshold is a positive prediction.
ConfusionCounts confusion_counts(std::span<const double> scores, std::span<const int> labels,
                                 double threshold);

// Mann-Whitney statistic with ties counted one half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct MetricsReport {
  double auc = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double fpr = 0;
  double fnr = 0;
  ConfusionCounts counts;
  double decision_threshold = 0.5;
  // Threshold among the observed scores that maximises F1, and that F1.
  double best_f1_threshold = 0.5;
  double best_f1 = 0;
};

// Rates from counts; undefined ratios are 0.
void fill_rates(MetricsReport& r);

MetricsReport compute_report(std::span<const double> scores, std::span<const int> labels,
                             double threshold = 0.5);

}  // namespace rwt::evaluation
