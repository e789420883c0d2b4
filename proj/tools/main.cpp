// Copyright 2026 The latentatlas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// latentatlas command-line entry point.
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <csignal>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include "json_config.hpp"
#include "latentatlas/analysis.hpp"
#include "latentatlas/atlas.hpp"
#include "latentatlas/errors.hpp"
#include "latentatlas/factorization.hpp"
#include "latentatlas/features.hpp"
#include "latentatlas/gen_core.hpp"
#include "latentatlas/image_io.hpp"
#include "latentatlas/metrics.hpp"
#include "latentatlas/study_http.hpp"
#include "latentatlas/study_service.hpp"
#include "latentatlas/trainer.hpp"
#include "latentatlas/traversal.hpp"
#include "latentatlas/weights_io.hpp"

// After Eigen: <resolv.h> defines a _res macro that breaks Eigen headers.
#include <httplib.h>

#ifndef LATENTATLAS_VERSION
#define LATENTATLAS_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace latentatlas;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

std::string version_text() {
  std::ostringstream out;
  out << "latentatlas " << LATENTATLAS_VERSION << "\n"
      << "weights format: SGW" << static_cast<int>(kSgwVersion) << "\n"
      << "response log schema: " << study::kLogSchema;
  return out.str();
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path.string());
  out << text;
  if (!out) throw IoError("write failed", path.string());
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_text(out, j.dump(2) + "\n");
  }
}

std::vector<AttributeDirection> load_directions(const fs::path& path) {
  try {
    return parse_directions_manifest(json::parse(read_text(path)));
  } catch (const json::exception& e) {
    throw InvalidInput("malformed directions manifest " + path.string() + ": " + e.what());
  }
}

AttributeDirection pick_direction(const std::vector<AttributeDirection>& dirs, int rank) {
  for (const AttributeDirection& d : dirs) {
    if (d.rank == rank) return d;
  }
  throw InvalidInput("no direction with rank " + std::to_string(rank));
}

std::vector<fs::path> png_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory", dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<Image> load_images(const fs::path& dir) {
  std::vector<Image> images;
  for (const fs::path& f : png_files(dir)) images.push_back(read_png(f));
  if (images.empty()) throw InvalidInput("no PNG images in " + dir.string());
  return images;
}

// Base code for traversals: a sampled z mapped to W.
LatentCode base_code(const StyleWeights& weights, std::uint64_t seed, double psi) {
  return map_latent(sample_z(weights.shape.latent_dim, seed), weights, psi);
}

NoiseSeed noise_from(const std::optional<std::uint64_t>& seed) {
  return seed ? NoiseSeed(*seed) : kZeroNoise;
}

// ---------------------------------------------------------------- train-toy

struct TrainOptions {
  int steps = 500;
  std::uint64_t seed = 0;
  std::string out;
  int checkpoint_interval = 100;
  int dataset_size = 256;
  int batch_size = 8;
  bool select = false;
  int fd_count = kDefaultGenCount;
};

int run_train(const TrainOptions& o) {
  TrainConfig cfg;
  cfg.steps = o.steps;
  cfg.seed = o.seed;
  cfg.checkpoint_interval = o.checkpoint_interval;
  cfg.dataset_size = o.dataset_size;
  cfg.batch_size = o.batch_size;
  cfg.validate();
  const TrainResult result = train(cfg);

  json summary = {{"seed", o.seed},
                  {"steps", o.steps},
                  {"initial_eval_d_loss", result.initial_eval_d_loss},
                  {"final_eval_d_loss", result.final_eval_d_loss},
                  {"checkpoints", json::array()}};
  std::vector<StyleWeights> weights;
  std::vector<std::string> paths;
  for (const Checkpoint& c : result.checkpoints) {
    paths.push_back(write_checkpoint(c, o.seed, o.out).string());
    summary["checkpoints"].push_back(paths.back());
    weights.push_back(c.weights);
  }

  if (o.select) {
    std::mt19937_64 rng(o.seed);
    const std::uint64_t real_seed = rng(), gen_seed = rng();
    std::vector<Image> real;
    for (const LabeledImage& li :
         procedural_dataset(o.fd_count, real_seed, cfg.shape.resolution())) {
      real.push_back(li.image);
    }
    const FeatureExtractor extractor = shallow_extractor();
    const CheckpointSelection sel =
        select_checkpoint(weights, real, extractor, o.fd_count, gen_seed);
    const FdReport report{paths[sel.best_index], sel.scores[sel.best_index],
                          static_cast<int>(real.size()), o.fd_count, extractor.id};
    write_fd_report(report, fs::path(o.out) / "fd_report.json");
    summary["selected"] = to_json(report);
    summary["fd_scores"] = sel.scores;
  }
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- factorize

struct FactorizeOptions {
  std::string weights;
  int j = kDefaultDirectionCount;
  std::vector<int> layers;
  std::string out;
};

int run_factorize(const FactorizeOptions& o) {
  const StyleWeights w = load_weights(o.weights);
  const Eigen::MatrixXd a = o.layers.empty() ? stack_affine(w) : stack_affine(w, o.layers);
  const auto dirs = sefa(a, o.j);
  const SpectrumReport check = verify_spectrum(a, dirs);
  if (!check.all_ok()) {
    std::string ranks;
    for (int r : check.failed_ranks()) ranks += " " + std::to_string(r);
    throw NumericalFailure("spectrum verification failed for ranks" + ranks);
  }
  emit(directions_manifest(dirs), o.out);
  spdlog::info("wrote {} directions from a {}x{} affine stack", dirs.size(), a.rows(), a.cols());
  return 0;
}

// ---------------------------------------------------------------- traverse

struct TraverseOptions {
  std::string weights;
  std::string directions;
  int rank = 0;
  std::uint64_t seed = 0;
  double psi = 1.0;
  double lo = 0.0;
  double hi = kDefaultIntervalMax;
  double step = kDefaultStepAlpha;
  bool any_interval = false;
  std::optional<std::uint64_t> noise_seed;
  int progression = 0;
  std::string category;
  std::string out;
};

int run_traverse(const TraverseOptions& o) {
  const StyleWeights w = load_weights(o.weights);
  AttributeDirection dir = pick_direction(load_directions(o.directions), o.rank);
  if (!o.category.empty()) dir = assign_category(dir, o.category);
  const LatentCode base = base_code(w, o.seed, o.psi);
  const fs::path out(o.out);

  if (o.progression > 0) {
    const ProgressionSequence seq =
        make_progression("dir" + std::to_string(o.rank) + "-seed" + std::to_string(o.seed), base,
                         dir, {o.lo, o.hi}, w, noise_from(o.noise_seed), o.progression);
    std::cout << write_progression(seq, out).dump(2) << '\n';
    return 0;
  }

  TraversalSpec spec{base, dir, o.lo, o.hi, o.step, o.any_interval};
  fs::create_directories(out);
  json manifest = {{"rank", o.rank},
                   {"seed", o.seed},
                   {"psi", o.psi},
                   {"interval", {o.lo, o.hi}},
                   {"step_alpha", o.step},
                   {"base_w", std::vector<double>(base.values.data(),
                                                  base.values.data() + base.values.size())},
                   {"alphas", json::array()},
                   {"files", json::array()}};
  for (const GeneratedImage& img : render_traversal(spec, w, noise_from(o.noise_seed))) {
    const std::string name = strip_file_name(o.rank, *img.alpha);
    write_png(img.image, out / name);
    manifest["alphas"].push_back(*img.alpha);
    manifest["files"].push_back(name);
  }
  write_text(out / "traversal.json", manifest.dump(2) + "\n");
  std::cout << manifest.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- atlas

struct AtlasOptions {
  std::string weights;
  std::string directions;
  int count = 0;  // 0: every direction in the manifest
  std::uint64_t seed = 0;
  double psi = 1.0;
  double lo = 0.0;
  double hi = 8.0;
  double step = kDefaultStepAlpha;
  bool any_interval = false;
  std::optional<std::uint64_t> noise_seed;
  std::string prototypes;
  double perplexity = 30.0;
  int k = kDefaultNeighbourhood;
  std::string out;
};

// Prototype images live in one subdirectory per tag: <dir>/<tag>/<id>.png.
std::vector<Prototype> load_prototypes(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory", dir.string());
  std::vector<fs::path> tags;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) tags.push_back(entry.path());
  }
  std::sort(tags.begin(), tags.end());
  std::vector<Prototype> out;
  for (const fs::path& tag : tags) {
    for (const fs::path& f : png_files(tag)) {
      out.push_back({tag.filename().string() + "/" + f.stem().string(), tag.filename().string(),
                     read_png(f)});
    }
  }
  if (out.empty()) throw InvalidInput("no prototype images under " + dir.string());
  return out;
}

int run_atlas(const AtlasOptions& o) {
  const StyleWeights w = load_weights(o.weights);
  std::vector<AttributeDirection> dirs = load_directions(o.directions);
  if (o.count > 0 && o.count < static_cast<int>(dirs.size())) dirs.resize(o.count);

  std::mt19937_64 rng(o.seed);
  AtlasConfig cfg;
  cfg.base_w = base_code(w, rng(), o.psi);
  cfg.interval_lo = o.lo;
  cfg.interval_hi = o.hi;
  cfg.step_alpha = o.step;
  cfg.allow_any_interval = o.any_interval;
  cfg.noise_seed = noise_from(o.noise_seed);

  AtlasManifest manifest;
  if (o.prototypes.empty()) {
    manifest = build_atlas(dirs, w, cfg, o.out);
  } else {
    const std::vector<Prototype> protos = load_prototypes(o.prototypes);
    TsneConfig tsne_cfg;
    tsne_cfg.perplexity = o.perplexity;
    tsne_cfg.seed = rng();
    const auto strips = render_strips(dirs, w, cfg);
    const LabelingResult labeling = embed_and_label(dirs, strips, protos, tsne_cfg, o.k);
    manifest = build_atlas(labeling.directions, w, cfg, o.out, &labeling, protos);
  }
  int relevant = 0;
  for (const AttributeDirection& d : manifest.directions) relevant += d.pathology_relevant.value_or(false);
  const json summary = {{"manifest", (fs::path(o.out) / "atlas.json").string()},
                        {"directions", manifest.directions.size()},
                        {"pathology_relevant", relevant},
                        {"strips", manifest.strips.size()}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- fd

struct FdOptions {
  std::string real;
  std::string generated;
  std::string weights;
  int count = kDefaultGenCount;
  std::uint64_t seed = 0;
  std::string out;
};

int run_fd(const FdOptions& o) {
  const std::vector<Image> real = load_images(o.real);
  const FeatureExtractor extractor = shallow_extractor();
  FdReport report;
  report.extractor_id = extractor.id;
  report.n_real = static_cast<int>(real.size());
  if (!o.generated.empty()) {
    const std::vector<Image> gen = load_images(o.generated);
    report.checkpoint = o.generated;
    report.n_gen = static_cast<int>(gen.size());
    report.score = fd_between_image_sets(real, gen, extractor);
  } else {
    const StyleWeights w = load_weights(o.weights);
    report.checkpoint = o.weights;
    report.n_gen = o.count;
    report.score = fid_between_sets(real, o.count, w, extractor, o.seed);
  }
  if (!o.out.empty()) write_fd_report(report, o.out);
  std::cout << to_json(report).dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------- serve

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> experiments;
  std::string data_dir;
};

int run_serve(const ServeOptions& o) {
  // Signals are taken by a dedicated thread so shutdown runs outside a handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  study::StudyService service(o.data_dir);
  for (const std::string& path : o.experiments) {
    service.add_experiment(study::load_experiment_config(path));
  }
  const char* token = std::getenv(study::kAdminTokenEnv);
  if (!token || !*token) {
    spdlog::warn("{} is not set; export is disabled", study::kAdminTokenEnv);
  }
  study::StudyHttpServer server(service, token ? token : "");
  const int port = server.bind(o.host, o.port);
  std::cout << "listening on " << o.host << ":" << port << std::endl;

  std::thread waiter([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {}; shutting down", sig);
    server.stop();
  });
  waiter.detach();
  server.listen();
  return 0;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::string log;
  std::string out;
  std::string csv_dir;
  bool wilson = false;
  bool all_items = false;
};

int run_analyze(const AnalyzeOptions& o) {
  const study::ResponseLog log = study::parse_log(read_text(o.log));
  study::AnalysisOptions options;
  options.common_only = !o.all_items;
  options.ci = o.wilson ? study::CiMethod::kWilson : study::CiMethod::kWald;
  const json report = study::analyze(log, options);
  if (!o.csv_dir.empty()) study::write_csv_tables(report, o.csv_dir);
  emit(report, o.out);
  return 0;
}

// ---------------------------------------------------------------- export

struct ExportOptions {
  std::string experiment;  // config file, offline mode
  std::string data_dir;
  std::string url;  // running server, online mode
  std::string id;
  std::string out;
};

int run_export(const ExportOptions& o) {
  std::string body;
  if (!o.url.empty()) {
    if (o.id.empty()) throw InvalidInput("export --url needs --id");
    const char* token = std::getenv(study::kAdminTokenEnv);
    if (!token || !*token) throw Unauthorized(std::string(study::kAdminTokenEnv) + " is not set");
    httplib::Client cli(o.url);
    const auto res = cli.Get("/api/experiments/" + o.id + "/export",
                             {{"Authorization", std::string("Bearer ") + token}});
    if (!res) throw IoError("request failed (" + httplib::to_string(res.error()) + ")", o.url);
    if (res->status != 200) {
      throw Error("export returned HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    body = res->body;
  } else {
    if (o.experiment.empty() || o.data_dir.empty()) {
      throw InvalidInput("export needs --url and --id, or --experiment and --data-dir");
    }
    study::StudyService service(o.data_dir);
    study::ExperimentConfig cfg = study::load_experiment_config(o.experiment);
    const std::string id = cfg.id;
    service.add_experiment(std::move(cfg));
    body = service.export_responses(id);
  }
  if (o.out.empty()) {
    std::cout << body;
  } else {
    write_text(o.out, body);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("latentatlas");
  spdlog::set_default_logger(logger);

  CLI::App app{"latentatlas: latent-space factorization, atlas building and rating studies"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<latentatlas::cli::JsonConfig>());
  app.set_config("--config", "", "JSON config file; command-line flags override it");
  app.set_version_flag("--version", version_text());
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  TrainOptions train_opts;
  auto* train_cmd = app.add_subcommand("train-toy", "Train the toy generator on procedural ellipses");
  train_cmd->add_option("--steps", train_opts.steps, "Training steps")->capture_default_str();
  train_cmd->add_option("--seed", train_opts.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--out", train_opts.out, "Checkpoint directory")->required();
  train_cmd->add_option("--checkpoint-interval", train_opts.checkpoint_interval)->capture_default_str();
  train_cmd->add_option("--dataset-size", train_opts.dataset_size)->capture_default_str();
  train_cmd->add_option("--batch-size", train_opts.batch_size)->capture_default_str();
  train_cmd->add_flag("--select", train_opts.select, "Pick the checkpoint with the lowest FD");
  train_cmd->add_option("--fd-count", train_opts.fd_count, "Images per set for FD selection")
      ->capture_default_str();

  FactorizeOptions fact_opts;
  auto* fact_cmd = app.add_subcommand("factorize", "Closed-form direction discovery from affine weights");
  fact_cmd->add_option("--weights", fact_opts.weights, "SGW1 weights file")->required();
  fact_cmd->add_option("--j", fact_opts.j, "Number of directions")->capture_default_str();
  fact_cmd->add_option("--layers", fact_opts.layers, "Affine layers to stack (default: all)");
  fact_cmd->add_option("--out", fact_opts.out, "Directions manifest (default: stdout)");

  TraverseOptions trav_opts;
  auto* trav_cmd = app.add_subcommand("traverse", "Render a traversal or a progression along one direction");
  trav_cmd->add_option("--weights", trav_opts.weights)->required();
  trav_cmd->add_option("--directions", trav_opts.directions, "Directions manifest")->required();
  trav_cmd->add_option("--rank", trav_opts.rank, "Direction rank")->capture_default_str();
  trav_cmd->add_option("--seed", trav_opts.seed, "Seed of the base latent")->capture_default_str();
  trav_cmd->add_option("--psi", trav_opts.psi, "Truncation")->capture_default_str();
  trav_cmd->add_option("--lo", trav_opts.lo, "Interval start")->capture_default_str();
  trav_cmd->add_option("--hi", trav_opts.hi, "Interval end")->capture_default_str();
  trav_cmd->add_option("--step", trav_opts.step, "Alpha step")->capture_default_str();
  trav_cmd->add_flag("--any-interval", trav_opts.any_interval, "Allow intervals outside [0, 50]");
  trav_cmd->add_option("--noise-seed", trav_opts.noise_seed, "Per-pixel noise seed (default: zero noise)");
  trav_cmd->add_option("--progression", trav_opts.progression,
                       "Write an n-image progression over [lo, hi] instead");
  trav_cmd->add_option("--category", trav_opts.category, "vascular, anatomical, debris or abnormal");
  trav_cmd->add_option("--out", trav_opts.out, "Output directory")->required();

  AtlasOptions atlas_opts;
  auto* atlas_cmd = app.add_subcommand("atlas", "Render strips, optionally label directions, write the atlas");
  atlas_cmd->add_option("--weights", atlas_opts.weights)->required();
  atlas_cmd->add_option("--directions", atlas_opts.directions)->required();
  atlas_cmd->add_option("--count", atlas_opts.count, "Leading directions to include (0: all)");
  atlas_cmd->add_option("--seed", atlas_opts.seed)->capture_default_str();
  atlas_cmd->add_option("--psi", atlas_opts.psi)->capture_default_str();
  atlas_cmd->add_option("--lo", atlas_opts.lo)->capture_default_str();
  atlas_cmd->add_option("--hi", atlas_opts.hi)->capture_default_str();
  atlas_cmd->add_option("--step", atlas_opts.step)->capture_default_str();
  atlas_cmd->add_flag("--any-interval", atlas_opts.any_interval);
  atlas_cmd->add_option("--noise-seed", atlas_opts.noise_seed);
  atlas_cmd->add_option("--prototypes", atlas_opts.prototypes, "Directory of <tag>/<id>.png prototypes");
  atlas_cmd->add_option("--perplexity", atlas_opts.perplexity)->capture_default_str();
  atlas_cmd->add_option("--k", atlas_opts.k, "Neighbourhood size for labeling")->capture_default_str();
  atlas_cmd->add_option("--out", atlas_opts.out, "Output directory")->required();

  FdOptions fd_opts;
  auto* fd_cmd = app.add_subcommand("fd", "Frechet distance on shallow image features");
  fd_cmd->add_option("--real", fd_opts.real, "Directory of real PNGs")->required();
  auto* fd_source = fd_cmd->add_option_group("source", "Exactly one of --generated, --weights");
  fd_source->add_option("--generated", fd_opts.generated, "Directory of generated PNGs");
  fd_source->add_option("--weights", fd_opts.weights, "Generate images from these weights");
  fd_source->require_option(1);
  fd_cmd->add_option("--count", fd_opts.count, "Images to generate")->capture_default_str();
  fd_cmd->add_option("--seed", fd_opts.seed)->capture_default_str();
  fd_cmd->add_option("--out", fd_opts.out, "Report JSON path");

  ServeOptions serve_opts;
  auto* serve_cmd = app.add_subcommand("serve", "Run the rating study HTTP service");
  serve_cmd->add_option("--host", serve_opts.host)->capture_default_str();
  serve_cmd->add_option("--port", serve_opts.port, "0 picks a free port")->capture_default_str();
  serve_cmd->add_option("--experiment", serve_opts.experiments, "Experiment config JSON")->required();
  serve_cmd->add_option("--data-dir", serve_opts.data_dir, "Journal directory (default: in memory)");

  AnalyzeOptions analyze_opts;
  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze an exported response log");
  analyze_cmd->add_option("--log", analyze_opts.log, "JSONL response log")->required();
  analyze_cmd->add_option("--out", analyze_opts.out, "Report JSON (default: stdout)");
  analyze_cmd->add_option("--csv-dir", analyze_opts.csv_dir, "Write plot-ready CSV tables here");
  analyze_cmd->add_flag("--wilson", analyze_opts.wilson, "Add Wilson intervals");
  analyze_cmd->add_flag("--all-items", analyze_opts.all_items,
                        "Agreement over every shared item, not only the common subset");

  ExportOptions export_opts;
  auto* export_cmd = app.add_subcommand("export", "Export a response log");
  export_cmd->add_option("--url", export_opts.url, "Base URL of a running service");
  export_cmd->add_option("--id", export_opts.id, "Experiment id (with --url)");
  export_cmd->add_option("--experiment", export_opts.experiment, "Experiment config (offline)");
  export_cmd->add_option("--data-dir", export_opts.data_dir, "Journal directory (offline)");
  export_cmd->add_option("--out", export_opts.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*train_cmd) return run_train(train_opts);
    if (*fact_cmd) return run_factorize(fact_opts);
    if (*trav_cmd) return run_traverse(trav_opts);
    if (*atlas_cmd) return run_atlas(atlas_opts);
    if (*fd_cmd) return run_fd(fd_opts);
    if (*serve_cmd) return run_serve(serve_opts);
    if (*analyze_cmd) return run_analyze(analyze_opts);
    if (*export_cmd) return run_export(export_opts);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
