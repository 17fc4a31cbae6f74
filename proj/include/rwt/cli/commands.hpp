#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "rwt/datamodel/manifest.hpp"
#include "rwt/datamodel/types.hpp"

namespace rwt::cli {

// Bad invocation: missing or conflicting options, unknown config keys. Maps
// to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Each command receives its fully resolved configuration (defaults, then the
// config file, then explicit flags) and returns the process exit code.
int run_select(const nlohmann::json& cfg);
int run_aggregate(const nlohmann::json& cfg);
int run_split(const nlohmann::json& cfg);
int run_stats(const nlohmann::json& cfg);
int run_synth(const nlohmann::json& cfg);
int run_scoremaps(const nlohmann::json& cfg);
int run_train(const nlohmann::json& cfg);
int run_eval(const nlohmann::json& cfg);
int run_serve(const nlohmann::json& cfg);

// Rewrites relative image and score-map paths so they stay valid when the
// manifest moves from `from_dir` to `to_dir`.
DatasetManifest rebase_paths(DatasetManifest manifest, const std::filesystem::path& from_dir,
                             const std::filesystem::path& to_dir);

// Directory against which a manifest's relative paths resolve.
std::filesystem::path manifest_dir(const std::filesystem::path& manifest_path);

}  // namespace rwt::cli
