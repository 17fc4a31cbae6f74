#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwt/evaluation/metrics.hpp"

namespace rwt::evaluation {

nlohmann::json to_json(const MetricsReport& r);

// Fixed-width table, columns AUC, Precision, Recall, F1, FPR, FNR.
std::string format_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);

void write_report(const std::filesystem::path& path, const MetricsReport& r);

}  // namespace rwt::evaluation
