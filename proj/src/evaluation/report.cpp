#include "rwt/evaluation/report.hpp"

#include <fstream>

#include <fmt/format.h>

#include "rwt/datamodel/types.hpp"

namespace rwt::evaluation {

nlohmann::json to_json(const MetricsReport& r) {
  return {{"auc", r.auc},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"fpr", r.fpr},
          {"fnr", r.fnr},
          {"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn},
                      {"fn", r.counts.fn}}},
          {"decision_threshold", r.decision_threshold},
          {"best_f1_threshold", r.best_f1_threshold},
          {"best_f1", r.best_f1},
          {"zero_denominator", "ratios with an empty denominator are reported as 0"}};
}

std::string format_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::size_t name_w = 5;
  for (const auto& [name, _] : rows) name_w = std::max(name_w, name.size());
  std::string out = fmt::format("{:<{}}  {:>5}  {:>9}  {:>6}  {:>5}  {:>5}  {:>5}\n", "Model",
                                name_w, "AUC", "Precision", "Recall", "F1", "FPR", "FNR");
  for (const auto& [name, r] : rows) {
    out += fmt::format("{:<{}}  {:>5.2f}  {:>9.2f}  {:>6.2f}  {:>5.2f}  {:>5.2f}  {:>5.2f}\n",
                       name, name_w, r.auc, r.precision, r.recall, r.f1, r.fpr, r.fnr);
  }
  return out;
}

void write_report(const std::filesystem::path& path, const MetricsReport& r) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(r).dump(2) << '\n';
}

}  // namespace rwt::evaluation
