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

#pragma once

// Study service: experiments, rater sessions, stimulus scheduling and the
// durable response log. Transport-independent; see study_http.hpp for the
// HTTP binding.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "latentatlas/image.hpp"
#include "latentatlas/study_types.hpp"

namespace latentatlas::study {

struct PoolImage {
  std::string name;  // unique within its pool; never shown to raters
  Image image;
  std::optional<Category> category;
};

struct ProgressionSpec {
  std::string name;
  std::vector<Image> images;  // kProgressionSize frames, increasing alpha
  std::optional<Category> category;
  std::optional<int> direction;
};

inline constexpr int kDefaultRankingSets = 37;
inline constexpr int kDefaultMinImages = 50;
inline constexpr int kDefaultCommonImages = 50;

struct ExperimentConfig {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<Task> tasks = {Task::kTuring, Task::kRanking, Task::kProgression};
  std::vector<PoolImage> real;
  std::vector<PoolImage> generated;
  std::vector<ProgressionSpec> progressions;
  int turing_count = -1;  // images per Turing schedule; -1 = whole pool
  int common_count = kDefaultCommonImages;
  int min_images = kDefaultMinImages;
  int ranking_count = kDefaultRankingSets;
  bool ranking_with_replacement = false;
};

/// Canonical description used for the config hash: names, categories and a
/// content hash per image.
nlohmann::json describe(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

/// Reads an experiment config file. Pools are either a directory (all PNGs,
/// sorted by name) or a list of {"file", "category"} entries; relative paths
/// resolve against the config file's directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Opaque public id for an image.
std::string image_id(const std::string& experiment, std::string_view pool,
                     const std::string& name);

/// Each set holds two distinct reals and two distinct generates in shuffled
/// order. Without replacement no image appears in two sets, so each pool must
/// hold 2 * count images; otherwise InvalidInput.
std::vector<Stimulus> build_ranking_sets(std::span<const std::string> real_ids,
                                         std::span<const std::string> gen_ids, int count,
                                         std::uint64_t seed, bool with_replacement = false);

struct SessionInfo {
  std::string token;
  int index = 0;
  std::string experiment;
  std::string user_id;
  std::size_t scheduled = 0;
  std::size_t answered = 0;
};

class StudyService {
 public:
  /// Empty `data_dir` keeps logs in memory only.
  explicit StudyService(std::filesystem::path data_dir = {});
  ~StudyService();
  StudyService(const StudyService&) = delete;
  StudyService& operator=(const StudyService&) = delete;

  /// Registers an experiment and replays its journals from `data_dir` if they
  /// exist. A journal written under a different config raises Conflict.
  void add_experiment(ExperimentConfig config);
  std::vector<std::string> experiment_ids() const;

  std::string create_session(const ExpertProfile& profile, const std::string& experiment_id);
  SessionInfo session(const std::string& token) const;

  /// First unanswered stimulus in the session schedule, or nullopt when done.
  /// The returned value carries ground truth; send `public_json` to raters.
  std::optional<Stimulus> next_stimulus(const std::string& token) const;

  /// Returns the log sequence number of the stored record.
  std::int64_t submit_response(const std::string& token, const ResponseSubmission& submission);

  /// Header line plus one line per response, in arrival order.
  std::string export_responses(const std::string& experiment_id) const;
  std::vector<LogRecord> records(const std::string& experiment_id) const;

  std::vector<Stimulus> stimuli(const std::string& experiment_id, Task task) const;
  std::vector<std::string> common_stimuli(const std::string& experiment_id) const;

  std::vector<std::uint8_t> image_png(const std::string& image_id) const;

 private:
  struct Experiment;
  struct Session;

  Experiment& experiment_locked(const std::string& id) const;
  Session& session_locked(const std::string& token) const;
  void rebuild_schedule(const Experiment& exp, Session& s) const;
  const Stimulus* pending_locked(const Session& s) const;

  std::filesystem::path data_dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::unique_ptr<Experiment>> experiments_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
};

}  // namespace latentatlas::study
