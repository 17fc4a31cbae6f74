#include "rwt/evaluation/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "rwt/datamodel/types.hpp"

namespace rwt::evaluation {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error("scores and labels differ in length (" + std::to_string(scores.size()) +
                " vs " + std::to_string(labels.size()) + ")");
  }
  if (scores.empty()) throw Error("no scores to evaluate");
  for (int l : labels)
    if (l != 0 && l != 1) throw Error("labels must be 0 or 1");
}

double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

}  // namespace

ConfusionCounts confusion_counts(std::span<const double> scores, std::span<const int> labels,
                                 double threshold) {
  check_inputs(scores, labels);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (labels[i] == 1) {
      pred ? ++c.tp : ++c.fn;
    } else {
      pred ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of average ranks (1-based) over the positives.
  double pos_rank_sum = 0;
  std::int64_t pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        pos_rank_sum += avg_rank;
        ++pos;
      }
    }
    i = j;
  }
  const std::int64_t neg = static_cast<std::int64_t>(scores.size()) - pos;
  if (pos == 0 || neg == 0) throw Error("AUC needs both classes present");
  const double u = pos_rank_sum - static_cast<double>(pos) * (pos + 1) / 2.0;
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

void fill_rates(MetricsReport& r) {
  const auto& c = r.counts;
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = ratio(c.tp, c.tp + c.fn);
  r.f1 = ratio(2.0 * r.precision * r.recall, r.precision + r.recall);
  r.fpr = ratio(c.fp, c.fp + c.tn);
  r.fnr = ratio(c.fn, c.fn + c.tp);
}

MetricsReport compute_report(std::span<const double> scores, std::span<const int> labels,
                             double threshold) {
  MetricsReport r;
  r.auc = roc_auc(scores, labels);
  r.decision_threshold = threshold;
  r.counts = confusion_counts(scores, labels, threshold);
  fill_rates(r);

  // Sweep thresholds over the distinct scores, highest first.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::int64_t positives = 0;
  for (int l : labels) positives += l;
  std::int64_t tp = 0, fp = 0;
  r.best_f1 = -1;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      labels[order[j]] == 1 ? ++tp : ++fp;
      ++j;
    }
    const double p = ratio(tp, tp + fp);
    const double rc = ratio(tp, positives);
    const double f = ratio(2 * p * rc, p + rc);
    if (f > r.best_f1) {
      r.best_f1 = f;
      r.best_f1_threshold = scores[order[i]];
    }
    i = j;
  }
  return r;
}

}  // namespace rwt::evaluation
