#include "rwt/cli/commands.hpp"

#include <pthread.h>

#include <array>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <spdlog/spdlog.h>

#include "rwt/annotation/aggregate.hpp"
#include "rwt/annotation/split.hpp"
#include "rwt/annotation/stats.hpp"
#include "rwt/datamodel/image_io.hpp"
#include "rwt/datamodel/tensor_io.hpp"
#include "rwt/datamodel/votes.hpp"
#include "rwt/evaluation/report.hpp"
#include "rwt/scoremap/layout.hpp"
#include "rwt/scoremap/provider.hpp"
#include "rwt/selection/gate.hpp"
#include "rwt/synth/generator.hpp"
#include "rwt/training/trainer.hpp"
#include "rwt/vetting/server.hpp"

namespace rwt::cli {
namespace fs = std::filesystem;
namespace {

fs::path path_of(const nlohmann::json& cfg, const char* key) {
  return fs::path(cfg.at(key).get<std::string>());
}

std::optional<fs::path> optional_path(const nlohmann::json& cfg, const char* key) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return std::nullopt;
  return path_of(cfg, key);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void write_output_manifest(const fs::path& out, const DatasetManifest& manifest,
                           const fs::path& from) {
  write_manifest(out, rebase_paths(manifest, from, manifest_dir(out)));
  spdlog::info("wrote {} records to {}", manifest.size(), out.string());
}

std::optional<scoremap::ScoreMapProvider> backbone_provider(const nlohmann::json& cfg) {
  auto weights = optional_path(cfg, "weights");
  if (!weights) return std::nullopt;
  scoremap::ProviderConfig pc;
  pc.mode = scoremap::ProviderMode::kPretrainedBackbone;
  pc.weights_path = *weights;
  return scoremap::ScoreMapProvider(pc);
}

training::LabeledSet load_eval_set(DatasetManifest manifest, const std::string& split,
                                   const fs::path& base, int side) {
  if (split == "all") {
    for (std::size_t i = 0; i < manifest.size(); ++i) {
      if (manifest[i].binary_class) manifest[i].split = Split::kVal;
    }
    return training::load_split(manifest, Split::kVal, base, side);
  }
  return training::load_split(manifest, parse_split(split), base, side);
}

std::atomic<vetting::VettingServer*> g_server{nullptr};

}  // namespace

fs::path manifest_dir(const fs::path& manifest_path) {
  const auto parent = manifest_path.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

DatasetManifest rebase_paths(DatasetManifest manifest, const fs::path& from_dir,
                             const fs::path& to_dir) {
  const fs::path from = fs::weakly_canonical(fs::absolute(from_dir));
  const fs::path to = fs::weakly_canonical(fs::absolute(to_dir));
  if (from == to) return manifest;
  auto move = [&](std::string& p) {
    fs::path path(p);
    if (path.is_absolute()) return;
    const fs::path abs = fs::weakly_canonical(from / path);
    const fs::path rel = abs.lexically_relative(to);
    p = rel.empty() ? abs.string() : rel.generic_string();
  };
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    move(manifest[i].image_path);
    if (manifest[i].score_map_path) move(*manifest[i].score_map_path);
  }
  return manifest;
}

int run_select(const nlohmann::json& cfg) {
  const fs::path in = path_of(cfg, "manifest");
  const fs::path base = optional_path(cfg, "base_dir").value_or(manifest_dir(in));
  selection::GateConfig gate;
  gate.region_threshold = cfg.at("region_threshold").get<double>();
  gate.gate_cutoff = cfg.at("gate_cutoff").get<double>();
  gate.validate();
  const auto backbone = backbone_provider(cfg);
  const selection::ScoreMapSource source =
      [&](const ManifestRecord& r) -> std::optional<ScoreMap> {
    if (r.score_map_path) return read_score_map(resolve(base, *r.score_map_path));
    if (backbone) return backbone->compute(pad_to_even(load_image(resolve(base, r.image_path))));
    return std::nullopt;
  };
  const auto manifest = read_manifest(in);
  const auto kept = selection::select_candidates(manifest, source, gate);
  spdlog::info("gate kept {} of {} images (T = {}, cutoff = {})", kept.size(), manifest.size(),
               gate.region_threshold, gate.gate_cutoff);
  write_output_manifest(path_of(cfg, "out"), kept, manifest_dir(in));
  return 0;
}

int run_aggregate(const nlohmann::json& cfg) {
  const fs::path in = path_of(cfg, "manifest");
  annotation::AggregationConfig ac;
  ac.time_percentile_cut = cfg.at("time_percentile").get<double>();
  ac.min_votes = cfg.at("min_votes").get<int>();
  ac.expected_votes = cfg.at("expected_votes").get<int>();
  ac.validate();
  const auto votes = read_votes(path_of(cfg, "votes"));
  const auto out = annotation::aggregate_manifest(read_manifest(in), votes, ac);
  std::size_t resolved = 0, ambiguous = 0, reannotate = 0;
  for (const auto& r : out) {
    resolved += r.label_resolved();
    ambiguous += r.aggregated && r.aggregated->ambiguous;
    reannotate += r.review_state == ReviewState::kNeedsReannotation;
  }
  spdlog::info("{} votes over {} images: {} resolved, {} ambiguous, {} need re-annotation",
               votes.size(), out.size(), resolved, ambiguous, reannotate);
  write_output_manifest(path_of(cfg, "out"), out, manifest_dir(in));
  return 0;
}

int run_split(const nlohmann::json& cfg) {
  const fs::path in = path_of(cfg, "manifest");
  annotation::AggregationConfig ac;
  ac.split_ratio = cfg.at("ratio").get<double>();
  ac.split_seed = cfg.at("seed").get<std::uint64_t>();
  ac.validate();
  DatasetManifest manifest = read_manifest(in);
  DatasetManifest labelled;
  for (const auto& r : manifest) {
    if (r.binary_class) labelled.append(r);
  }
  const auto split = annotation::split_dataset(labelled, ac);
  std::size_t train = 0;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (const auto* s = split.find(manifest[i].image_id)) {
      manifest[i].split = s->split;
      train += s->split == Split::kTrain;
    }
  }
  spdlog::info("split {} labelled records: {} train, {} val ({} unlabelled left unsplit)",
               labelled.size(), train, labelled.size() - train,
               manifest.size() - labelled.size());
  write_output_manifest(path_of(cfg, "out"), manifest, manifest_dir(in));
  return 0;
}

int run_stats(const nlohmann::json& cfg) {
  const auto manifest = read_manifest(path_of(cfg, "manifest"));
  std::vector<VoteRecord> votes;
  if (auto p = optional_path(cfg, "votes")) votes = read_votes(*p);
  const auto stats = annotation::dataset_stats(manifest, votes);
  const fs::path out = path_of(cfg, "out");
  annotation::write_stats(stats, out);
  std::cout << annotation::format_agreement_report(stats);
  spdlog::info("wrote dataset statistics for {} records to {}", stats.total, out.string());
  return 0;
}

int run_synth(const nlohmann::json& cfg) {
  synth::SyntheticSpec spec;
  if (auto p = optional_path(cfg, "spec")) {
    std::ifstream in(*p);
    if (!in) throw Error("cannot read synthesis spec '" + p->string() + "'");
    try {
      spec = synth::synthetic_spec_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed synthesis spec '" + p->string() + "': " + e.what());
    }
  }
  spec.seed = cfg.at("seed").get<std::uint64_t>();
  spec.validate();
  const int n = cfg.at("n").get<int>();
  if (n < 1) throw Error("--n must be positive");
  const fs::path out = path_of(cfg, "out");
  fs::create_directories(out);
  std::ofstream(out / "synth_spec.json") << synth::to_json(spec).dump(2) << '\n';
  const auto manifest = synth::generate_corpus(spec, n, out);
  std::array<int, 4> counts{};
  for (const auto& r : manifest) ++counts[static_cast<int>(*r.aggregated->label)];
  spdlog::info("synthesized {} images into {}: {} overlaying, {} organic, {} both, {} none", n,
               out.string(), counts[0], counts[1], counts[2], counts[3]);
  return 0;
}

int run_scoremaps(const nlohmann::json& cfg) {
  const fs::path in = path_of(cfg, "manifest");
  const fs::path base = manifest_dir(in);
  const fs::path out = path_of(cfg, "out");
  scoremap::ProviderConfig pc;
  pc.mode = scoremap::parse_provider_mode(cfg.at("mode").get<std::string>());
  pc.weights_path = optional_path(cfg, "weights");
  pc.oracle_sigma_px = cfg.at("sigma").get<double>();
  pc.validate();
  const scoremap::ScoreMapProvider provider(pc);
  const fs::path layouts = optional_path(cfg, "layouts").value_or(base / "layouts");

  DatasetManifest manifest = read_manifest(in);
  fs::create_directories(out / "scoremaps");
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    auto& r = manifest[i];
    const ImageTensor image = pad_to_even(load_image(resolve(base, r.image_path)));
    ScoreMap map;
    if (pc.mode == scoremap::ProviderMode::kSyntheticOracle) {
      const fs::path lp = layouts / (r.image_id + ".json");
      std::ifstream lf(lp);
      if (!lf) throw Error("no layout for '" + r.image_id + "' at " + lp.string());
      const auto layout = scoremap::layout_from_json(nlohmann::json::parse(lf));
      map = provider.compute(image, &layout);
    } else {
      map = provider.compute(image);
    }
    const std::string rel = "scoremaps/" + r.image_id + ".rwt";
    write_tensor(out / rel, map);
    r.image_path = fs::weakly_canonical(fs::absolute(resolve(base, r.image_path))).string();
    r.score_map_path = rel;
  }
  write_manifest(out / "manifest.jsonl", manifest);
  spdlog::info("computed {} score maps into {}", manifest.size(), (out / "scoremaps").string());
  return 0;
}

int run_train(const nlohmann::json& cfg) {
  const fs::path in = path_of(cfg, "manifest");
  const fs::path out = path_of(cfg, "out");
  nlohmann::json tj = nlohmann::json::object();
  const nlohmann::json defaults = training::to_json(training::TrainConfig{});
  for (auto it = defaults.begin(); it != defaults.end(); ++it) {
    tj[it.key()] = cfg.contains(it.key()) ? cfg.at(it.key()) : it.value();
  }
  const training::TrainConfig tc = training::train_config_from_json(tj);
  model::ModelConfig mc;
  mc.variant = model::parse_variant(cfg.at("variant").get<std::string>());
  mc.head_width = cfg.at("head_width").get<int>();
  mc.input_side = tc.target_side;
  mc.seed = tc.seed;
  mc.attention.kernel_size = cfg.at("kernel_size").get<int>();
  mc.attention.init_sigma = cfg.at("init_sigma").get<double>();
  mc.attention.init_gain = cfg.at("init_gain").get<double>();
  mc.attention.auto_gain = cfg.at("auto_gain").get<bool>();
  mc.attention.trainable = cfg.at("train_mask").get<bool>();

  const auto manifest = read_manifest(in);
  const auto base = manifest_dir(in);
  const auto train_set = training::load_split(manifest, Split::kTrain, base, tc.target_side);
  const auto val_set = training::load_split(manifest, Split::kVal, base, tc.target_side);
  if (val_set.size() == 0) throw Error("manifest has no labelled validation records");
  spdlog::info("training {} on {} train / {} val examples at {}px", model::to_string(mc.variant),
               train_set.size(), val_set.size(), tc.target_side);

  auto result = training::train(train_set, val_set, mc, tc, [](const training::EpochRecord& e) {
    spdlog::info("epoch {:>3}  lr {:.6g}  train {:.4f}  val {:.4f}  auc {:.3f}  f1 {:.3f}  {:.1f}s",
                 e.epoch, e.lr, e.train_loss, e.val_loss, e.val_auc, e.val_f1, e.seconds);
  });
  fs::create_directories(out);
  result.model.save(out / "model.ckpt");
  training::write_history(out / "history.csv", result.state);
  const auto scored = training::score_set(result.model, val_set, tc.batch_size);
  const auto report = evaluation::compute_report(scored.scores, val_set.labels);
  evaluation::write_report(out / "val_report.json", report);
  std::cout << evaluation::format_table({{std::string(model::to_string(mc.variant)), report}});
  spdlog::info("best epoch {} (val loss {:.4f}); checkpoint at {}", result.state.best_epoch,
               result.state.best_val_loss, (out / "model.ckpt").string());
  return 0;
}

int run_eval(const nlohmann::json& cfg) {
  const fs::path in = path_of(cfg, "manifest");
  const auto manifest = read_manifest(in);
  const auto base = manifest_dir(in);
  const std::string split = cfg.at("split").get<std::string>();
  if (split != "all" && split != "train" && split != "val") {
    throw UsageError("--split must be train, val or all");
  }
  const double threshold = cfg.at("threshold").get<double>();

  std::vector<std::pair<std::string, evaluation::MetricsReport>> rows;
  nlohmann::json models = nlohmann::json::array();
  for (const auto& c : cfg.at("ckpt")) {
    fs::path ckpt = c.get<std::string>();
    if (fs::is_directory(ckpt)) ckpt /= "model.ckpt";
    auto model = model::OverlayClassifier::load(ckpt);
    const auto set = load_eval_set(manifest, split, base, model.config().input_side);
    if (set.size() == 0) throw Error("no labelled records in split '" + split + "'");
    const auto scored = training::score_set(model, set);
    const auto report = evaluation::compute_report(scored.scores, set.labels, threshold);
    const std::string name(model::to_string(model.config().variant));
    rows.emplace_back(name, report);
    models.push_back({{"checkpoint", ckpt.string()},
                      {"variant", name},
                      {"split", split},
                      {"n", set.size()},
                      {"loss", scored.loss},
                      {"metrics", evaluation::to_json(report)}});
  }
  const fs::path out = path_of(cfg, "out");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream(out) << nlohmann::json{{"models", models}}.dump(2) << '\n';
  const std::string table = evaluation::format_table(rows);
  fs::path txt = out;
  std::ofstream(txt.replace_extension(".txt")) << table;
  std::cout << table;
  spdlog::info("wrote report to {}", out.string());
  return 0;
}

int run_serve(const nlohmann::json& cfg) {
  const fs::path in = path_of(cfg, "manifest");
  const fs::path out = optional_path(cfg, "out").value_or(manifest_dir(in) / "vetting");
  fs::create_directories(out);
  vetting::ServerOptions opts;
  DatasetManifest initial = read_manifest(in);
  if (auto images = optional_path(cfg, "images")) {
    opts.base_dir = *images;
  } else {
    initial = rebase_paths(std::move(initial), manifest_dir(in), out);
    opts.base_dir = out;
  }
  if (auto p = optional_path(cfg, "votes")) opts.votes = read_votes(*p);
  vetting::VettingStore store(std::move(initial), out / "audit.jsonl", out / "manifest.jsonl");
  vetting::VettingServer server(store, opts);

  const std::string host = cfg.at("host").get<std::string>();
  const int port = server.bind(host, cfg.at("port").get<int>());
  if (port < 0) throw Error("cannot bind " + host + ":" + std::to_string(cfg.at("port").get<int>()));

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  g_server = &server;
  std::thread([signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    if (auto* s = g_server.load()) s->stop();
  }).detach();

  spdlog::info("serving {} records on http://{}:{} (audit log {})", store.snapshot().size(), host,
               port, (out / "audit.jsonl").string());
  std::cout << "listening on http://" << host << ":" << port << std::endl;
  server.listen_after_bind();
  g_server = nullptr;
  spdlog::info("server stopped after {} decisions", store.log().size());
  return 0;
}

}  // namespace rwt::cli
