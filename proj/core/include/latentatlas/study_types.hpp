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

// Study domain types: rater profiles, stimuli, responses and the records of
// the append-only response log.

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "latentatlas/factorization.hpp"
#include "latentatlas/image.hpp"

namespace latentatlas::study {

inline constexpr const char* kLogSchema = "study-log/1";

enum class Familiarity { kExpert, kVeryFamiliar, kSomewhatFamiliar, kNotFamiliar };
const char* to_string(Familiarity f);
Familiarity parse_familiarity(std::string_view s);

struct ExpertProfile {
  std::string user_id;
  int years_experience = 0;
  Familiarity familiarity = Familiarity::kNotFamiliar;
  std::optional<std::string> institution;
};

/// Throws ValidationError on an empty user id or negative experience.
void validate(const ExpertProfile& profile);
nlohmann::json to_json(const ExpertProfile& profile);
ExpertProfile profile_from_json(const nlohmann::json& j);

enum class Task { kTuring, kRanking, kProgression };
const char* to_string(Task t);
Task parse_task(std::string_view s);

inline constexpr int kRankingSetSize = 4;
inline constexpr int kProgressionSize = 5;

/// Hidden provenance data, aligned with `Stimulus::image_ids`.
struct GroundTruth {
  std::vector<Provenance> provenance;
  std::optional<Category> category;
  std::optional<std::string> sequence;  // progression id
  std::optional<int> direction;

  bool operator==(const GroundTruth&) const = default;
};

struct Stimulus {
  std::string id;
  Task task = Task::kTuring;
  std::vector<std::string> image_ids;  // 1, 4 or 5 entries
  GroundTruth truth;
};

/// Throws ValidationError when the payload shape or the ranking 2+2 split is
/// violated.
void validate(const Stimulus& stimulus);

/// Rater-facing JSON; never contains ground truth.
nlohmann::json public_json(const Stimulus& stimulus);

struct TuringAnswer {
  Provenance verdict = Provenance::kReal;
  int difficulty = 3;  // 1 very difficult .. 5 very easy
  bool operator==(const TuringAnswer&) const = default;
};

struct RankingAnswer {
  std::vector<std::string> order;  // most realistic first
  bool operator==(const RankingAnswer&) const = default;
};

struct ProgressionAnswer {
  std::array<int, kProgressionSize> severities{};  // 1 normal .. 4 severe
  int plausibility = 3;                              // 1 very unlikely .. 5 very likely
  bool operator==(const ProgressionAnswer&) const = default;
};

/// Ends a Turing schedule early once the minimum image count is reached.
struct FinishTask {
  Task task = Task::kTuring;
  bool operator==(const FinishTask&) const = default;
};

using Answer = std::variant<TuringAnswer, RankingAnswer, ProgressionAnswer, FinishTask>;

struct ResponseSubmission {
  std::string stimulus_id;  // empty for FinishTask
  Answer answer;
  std::int64_t elapsed_ms = 0;
};

ResponseSubmission submission_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ResponseSubmission& submission);

/// Checks scale ranges and, for rankings, that `order` permutes the stimulus
/// images. Throws ValidationError.
void validate(const Answer& answer, const Stimulus& stimulus);

struct LogRecord {
  std::int64_t seq = 0;
  int session = 0;  // session index within the experiment
  std::string user_id;
  std::string stimulus_id;
  std::vector<std::string> image_ids;
  Answer answer;
  std::int64_t elapsed_ms = 0;
  GroundTruth truth;

  Task task() const;
  bool operator==(const LogRecord&) const = default;
};

nlohmann::json to_json(const LogRecord& record);
LogRecord record_from_json(const nlohmann::json& j);

struct LogHeader {
  std::string schema = kLogSchema;
  std::string experiment;
  std::string config_hash;
  bool operator==(const LogHeader&) const = default;
};

nlohmann::json to_json(const LogHeader& header);

struct ResponseLog {
  LogHeader header;
  std::vector<LogRecord> records;
};

/// One JSON object per line, header first.
std::string serialize_log(const ResponseLog& log);
/// Throws FormatError (offset = start of the offending line) on malformed input.
ResponseLog parse_log(std::string_view jsonl);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

}  // namespace latentatlas::study
