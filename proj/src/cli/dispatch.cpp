#include "rwt/cli/dispatch.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "rwt/cli/commands.hpp"

namespace rwt::cli {
namespace fs = std::filesystem;
namespace {

enum class OutKind { kFile, kDir };

// One configuration key. `flag` may be empty for keys settable only through
// the config file. The default's JSON type decides how flag text is parsed;
// a null default marks a path or name without a default.
struct Key {
  std::string name;
  std::string flag;
  nlohmann::json def;
  std::string help;
  bool required = false;
};

struct Command {
  std::string name;
  std::string help;
  OutKind out_kind;
  std::function<int(const nlohmann::json&)> run;
  std::vector<Key> keys;
};

std::vector<Command> commands() {
  const nlohmann::json null;
  return {
      {"select", "Keep images whose region gate score exceeds the cutoff", OutKind::kFile,
       run_select,
       {{"manifest", "--manifest", null, "input manifest (JSON Lines)", true},
        {"region_threshold", "--region-threshold", 0.8, "region score threshold T"},
        {"gate_cutoff", "--gate-cutoff", 5e-4, "keep images with G above this"},
        {"weights", "--weights", null, "detector weights for records without a score map"},
        {"base_dir", "--base-dir", null, "root for relative paths (default: manifest dir)"}}},
      {"aggregate", "Filter vote times, majority-vote labels and binarize", OutKind::kFile,
       run_aggregate,
       {{"votes", "--votes", null, "votes CSV", true},
        {"manifest", "--manifest", null, "input manifest", true},
        {"time_percentile", "--time-percentile", 5.0, "per-batch vote-time percentile cut"},
        {"min_votes", "--min-votes", 3, "fewer surviving votes flags re-annotation"},
        {"expected_votes", "--expected-votes", 5, "votes collected per image"}}},
      {"split", "Stratified train/validation split of labelled records", OutKind::kFile, run_split,
       {{"manifest", "--manifest", null, "input manifest", true},
        {"ratio", "--ratio", 0.75, "training fraction"}}},
      {"stats", "Dataset statistics as CSV and SVG", OutKind::kDir, run_stats,
       {{"manifest", "--manifest", null, "manifest", true},
        {"votes", "--votes", null, "votes CSV for agreement statistics"}}},
      {"synth", "Generate a synthetic labelled corpus", OutKind::kDir, run_synth,
       {{"spec", "--spec", null, "synthesis spec (JSON)"},
        {"n", "--n", 500, "number of images"}}},
      {"scoremaps", "Compute and cache score maps", OutKind::kDir, run_scoremaps,
       {{"manifest", "--manifest", null, "manifest", true},
        {"mode", "--mode", "oracle", "oracle or backbone"},
        {"weights", "--weights", null, "detector weights (backbone mode)"},
        {"layouts", "--layouts", null, "layout directory (oracle mode)"},
        {"sigma", "--sigma", 4.0, "oracle Gaussian sigma in pixels"}}},
      {"train", "Train an overlay-text classifier", OutKind::kDir, run_train,
       {{"manifest", "--manifest", null, "split manifest with score maps", true},
        {"variant", "--variant", "craft-masked",
         "craft-masked, unmasked-resnet or binarized-linear"},
        {"head_width", "--head-width", 64, "ResNet base width"},
        {"target_side", "--side", 224, "input side after resize and pad"},
        {"kernel_size", "--kernel-size", 33, "mixing kernel size"},
        {"init_sigma", "--init-sigma", 8.0, "mixing kernel sigma in map cells"},
        {"init_gain", "", 1.0, ""},
        {"auto_gain", "", true, ""},
        {"train_mask", "", true, ""},
        {"max_epochs", "--epochs", 30, "epoch limit"},
        {"lr0", "--lr", 0.015, "initial learning rate"},
        {"batch_size", "--batch-size", 32, "mini-batch size"},
        {"momentum", "", 0.9, ""},
        {"weight_decay", "", 1e-5, ""},
        {"anneal_factor", "", 0.5, ""},
        {"plateau_epsilon", "", 1e-4, ""},
        {"plateau_patience_epochs", "", 1, ""},
        {"min_lr", "", 1e-5, ""},
        {"restore_best", "", true, ""}}},
      {"eval", "Evaluate checkpoints on a manifest split", OutKind::kFile, run_eval,
       {{"ckpt", "--ckpt", nlohmann::json::array(), "checkpoint file or directory (repeatable)",
         true},
        {"manifest", "--manifest", null, "manifest", true},
        {"split", "--split", "val", "train, val or all"},
        {"threshold", "--threshold", 0.5, "decision threshold"}}},
      {"serve", "Serve the vetting API", OutKind::kDir, run_serve,
       {{"manifest", "--manifest", null, "manifest to review", true},
        {"images", "--images", null, "root for relative paths (default: manifest dir)"},
        {"votes", "--votes", null, "votes CSV shown with each example"},
        {"host", "--host", "127.0.0.1", "bind address"},
        {"port", "--port", 8080, "port (0 picks a free one)"}}},
  };
}

nlohmann::json parse_value(const std::string& text, const nlohmann::json& def,
                           const std::string& flag) {
  auto fail = [&]() -> nlohmann::json {
    throw UsageError(flag + ": invalid value '" + text + "'");
  };
  try {
    std::size_t used = 0;
    if (def.is_number_integer()) {
      const long long v = std::stoll(text, &used);
      return used == text.size() ? nlohmann::json(v) : fail();
    }
    if (def.is_number_float()) {
      const double v = std::stod(text, &used);
      return used == text.size() ? nlohmann::json(v) : fail();
    }
  } catch (const std::logic_error&) {
    return fail();
  }
  return text;
}

nlohmann::json load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot read '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("--config: '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("--config: expected a JSON object");
  return j;
}

void check_type(const std::string& key, const nlohmann::json& v, const nlohmann::json& def) {
  const bool ok = def.is_null() ? (v.is_string() || v.is_null())
                  : def.is_number() ? v.is_number()
                  : def.is_array()  ? v.is_array()
                                    : v.type() == def.type();
  if (!ok) throw UsageError("config key '" + key + "' has the wrong type");
}

std::shared_ptr<spdlog::logger> make_logger(const fs::path& log_path, bool verbose) {
  auto console = std::make_shared<spdlog::sinks::stderr_color_sink_mt>();
  console->set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  std::vector<spdlog::sink_ptr> sinks{console};
  if (!log_path.empty()) {
    auto file = std::make_shared<spdlog::sinks::basic_file_sink_mt>(log_path.string(), true);
    file->set_level(spdlog::level::debug);
    sinks.push_back(file);
  }
  auto logger = std::make_shared<spdlog::logger>("rwt", sinks.begin(), sinks.end());
  logger->set_level(spdlog::level::debug);
  logger->flush_on(spdlog::level::info);
  return logger;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  const auto table = commands();
  CLI::App app("Overlay-text detection for room photos", "rwt");
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  std::string config_path, out;
  bool verbose = false;
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  app.add_option("--config", config_path, "JSON config; explicit flags win over its values");
  auto* out_opt = app.add_option("--out", out, "output file or directory");
  app.add_flag("-v,--verbose", verbose, "debug logging");

  struct Bound {
    const Key* key;
    CLI::Option* opt;
    std::string text;
    std::vector<std::string> list;
  };
  std::map<std::string, std::vector<std::unique_ptr<Bound>>> bound;
  std::map<std::string, CLI::App*> subs;
  CLI::Option* out_dir_opt = nullptr;
  std::string out_dir;
  for (const auto& cmd : table) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    subs[cmd.name] = sub;
    for (const auto& key : cmd.keys) {
      if (key.flag.empty()) continue;
      auto b = std::make_unique<Bound>();
      b->key = &key;
      std::string help = key.help;
      if (key.required) help += " (required)";
      b->opt = key.def.is_array() ? sub->add_option(key.flag, b->list, help)
                                  : sub->add_option(key.flag, b->text, help);
      bound[cmd.name].push_back(std::move(b));
    }
    if (cmd.name == "stats") out_dir_opt = sub->add_option("--out-dir", out_dir, "same as --out");
  }

  auto reversed = std::vector<std::string>(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success&) {
    std::cout << (app.get_subcommands().empty() ? app.help() : app.get_subcommands()[0]->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    std::cerr << (app.get_subcommands().empty() ? app.help() : app.get_subcommands()[0]->help());
    return 2;
  }

  auto* chosen = app.get_subcommands().at(0);
  const Command* cmd = nullptr;
  for (const auto& c : table) {
    if (c.name == chosen->get_name()) cmd = &c;
  }

  nlohmann::json cfg;
  try {
    cfg = {{"command", cmd->name}, {"seed", 0}, {"out", nullptr}, {"verbose", false}};
    for (const auto& key : cmd->keys) cfg[key.name] = key.def;
    if (!config_path.empty()) {
      const nlohmann::json file = load_config_file(config_path);
      for (const auto& [k, v] : file.items()) {
        if (k == "command") {
          if (v != cmd->name) throw UsageError("--config was written for '" + v.dump() + "'");
          continue;
        }
        if (!cfg.contains(k)) throw UsageError("--config: unknown key '" + k + "' for " + cmd->name);
        const Key* key = nullptr;
        for (const auto& kk : cmd->keys) {
          if (kk.name == k) key = &kk;
        }
        if (key) check_type(k, v, key->def);
        cfg[k] = v;
      }
    }
    if (seed_opt->count()) cfg["seed"] = seed;
    if (out_dir_opt && out_dir_opt->count()) {
      if (out_opt->count()) throw UsageError("--out and --out-dir conflict; give one");
      cfg["out"] = out_dir;
    } else if (out_opt->count()) {
      cfg["out"] = out;
    }
    if (verbose) cfg["verbose"] = true;
    for (const auto& b : bound[cmd->name]) {
      if (!b->opt->count()) continue;
      cfg[b->key->name] = b->key->def.is_array()
                              ? nlohmann::json(b->list)
                              : parse_value(b->text, b->key->def, b->key->flag);
    }
    if (cfg.contains("ckpt") && cfg["ckpt"].is_string()) {
      cfg["ckpt"] = nlohmann::json::array({cfg["ckpt"]});
    }
    for (const auto& key : cmd->keys) {
      const auto& v = cfg[key.name];
      if (key.required && (v.is_null() || (v.is_array() && v.empty()))) {
        throw UsageError(key.flag + " is required");
      }
    }
    if (cfg["out"].is_null() && cmd->name != "serve") throw UsageError("--out is required");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << chosen->help();
    return 2;
  }

  fs::path run_dir;
  if (cfg["out"].is_string()) {
    const fs::path o = cfg["out"].get<std::string>();
    run_dir = cmd->out_kind == OutKind::kDir ? o : o.parent_path();
  } else {
    run_dir = fs::path(cfg["manifest"].get<std::string>()).parent_path() / "vetting";
  }
  if (run_dir.empty()) run_dir = ".";

  auto previous = spdlog::default_logger();
  int code = 0;
  try {
    fs::create_directories(run_dir);
    std::ofstream(run_dir / "effective_config.json") << cfg.dump(2) << '\n';
    spdlog::set_default_logger(make_logger(run_dir / "rwt.log", cfg["verbose"].get<bool>()));
    spdlog::debug("effective config: {}", cfg.dump());
    code = cmd->run(cfg);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    std::cerr << chosen->help();
    code = 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    code = 1;
  }
  spdlog::default_logger()->flush();
  spdlog::set_default_logger(previous);
  return code;
}

int dispatch(int argc, char** argv) {
  return dispatch(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace rwt::cli
