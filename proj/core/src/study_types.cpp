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

#include "latentatlas/study_types.hpp"

#include <algorithm>
#include <cstdio>

#include "latentatlas/errors.hpp"

namespace latentatlas::study {
namespace {

using nlohmann::json;

Provenance parse_provenance(const std::string& s) {
  if (s == "real") return Provenance::kReal;
  if (s == "generated") return Provenance::kGenerated;
  throw ValidationError("unknown provenance '" + s + "'");
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

json truth_json(const GroundTruth& t) {
  json j;
  json prov = json::array();
  for (Provenance p : t.provenance) prov.push_back(to_string(p));
  j["provenance"] = prov;
  j["category"] = t.category ? json(to_string(*t.category)) : json(nullptr);
  j["sequence"] = t.sequence ? json(*t.sequence) : json(nullptr);
  j["direction"] = t.direction ? json(*t.direction) : json(nullptr);
  return j;
}

GroundTruth truth_from_json(const json& j) {
  GroundTruth t;
  for (const json& p : j.at("provenance")) t.provenance.push_back(parse_provenance(p.get<std::string>()));
  if (!j.at("category").is_null()) t.category = parse_category(j["category"].get<std::string>());
  if (!j.at("sequence").is_null()) t.sequence = j["sequence"].get<std::string>();
  if (!j.at("direction").is_null()) t.direction = j["direction"].get<int>();
  return t;
}

}  // namespace

const char* to_string(Familiarity f) {
  switch (f) {
    case Familiarity::kExpert: return "expert";
    case Familiarity::kVeryFamiliar: return "very familiar";
    case Familiarity::kSomewhatFamiliar: return "somewhat familiar";
    case Familiarity::kNotFamiliar: return "not familiar";
  }
  return "not familiar";
}

Familiarity parse_familiarity(std::string_view s) {
  for (Familiarity f : {Familiarity::kExpert, Familiarity::kVeryFamiliar,
                        Familiarity::kSomewhatFamiliar, Familiarity::kNotFamiliar}) {
    if (s == to_string(f)) return f;
  }
  throw ValidationError("unknown familiarity '" + std::string(s) + "'");
}

void validate(const ExpertProfile& p) {
  if (p.user_id.empty()) throw ValidationError("user_id must not be empty");
  if (p.years_experience < 0) throw ValidationError("years_experience must be >= 0");
}

json to_json(const ExpertProfile& p) {
  return {{"user_id", p.user_id},
          {"years_experience", p.years_experience},
          {"wce_familiarity", to_string(p.familiarity)},
          {"institution", p.institution ? json(*p.institution) : json(nullptr)}};
}

ExpertProfile profile_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("profile must be an object");
  ExpertProfile p;
  p.user_id = field<std::string>(j, "user_id");
  p.years_experience = field<int>(j, "years_experience");
  p.familiarity = parse_familiarity(field<std::string>(j, "wce_familiarity"));
  if (j.contains("institution") && !j["institution"].is_null()) {
    p.institution = field<std::string>(j, "institution");
  }
  validate(p);
  return p;
}

const char* to_string(Task t) {
  switch (t) {
    case Task::kTuring: return "turing";
    case Task::kRanking: return "ranking";
    case Task::kProgression: return "progression";
  }
  return "turing";
}

Task parse_task(std::string_view s) {
  if (s == "turing") return Task::kTuring;
  if (s == "ranking") return Task::kRanking;
  if (s == "progression") return Task::kProgression;
  throw ValidationError("unknown task '" + std::string(s) + "'");
}

void validate(const Stimulus& s) {
  const std::size_t n = s.image_ids.size();
  if (s.truth.provenance.size() != n) throw ValidationError("stimulus truth does not match payload");
  switch (s.task) {
    case Task::kTuring:
      if (n != 1) throw ValidationError("turing stimulus must show one image");
      break;
    case Task::kRanking: {
      if (n != kRankingSetSize) throw ValidationError("ranking stimulus must show four images");
      const auto reals = std::count(s.truth.provenance.begin(), s.truth.provenance.end(),
                                    Provenance::kReal);
      if (reals != 2) throw ValidationError("ranking stimulus must hold two real and two generated images");
      std::vector<std::string> ids = s.image_ids;
      std::sort(ids.begin(), ids.end());
      if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
        throw ValidationError("ranking stimulus repeats an image");
      }
      break;
    }
    case Task::kProgression:
      if (n != kProgressionSize) throw ValidationError("progression stimulus must show five images");
      break;
  }
}

json public_json(const Stimulus& s) {
  return {{"id", s.id}, {"task", to_string(s.task)}, {"images", s.image_ids}};
}

void validate(const Answer& answer, const Stimulus& s) {
  std::visit(
      [&](const auto& a) {
        using A = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<A, TuringAnswer>) {
          if (s.task != Task::kTuring) throw ValidationError("turing answer for a non-turing stimulus");
          if (a.difficulty < 1 || a.difficulty > 5) throw ValidationError("difficulty must be in 1..5");
        } else if constexpr (std::is_same_v<A, RankingAnswer>) {
          if (s.task != Task::kRanking) throw ValidationError("ranking answer for a non-ranking stimulus");
          std::vector<std::string> got = a.order, want = s.image_ids;
          std::sort(got.begin(), got.end());
          std::sort(want.begin(), want.end());
          if (got != want) throw ValidationError("order must be a permutation of the stimulus images");
        } else if constexpr (std::is_same_v<A, ProgressionAnswer>) {
          if (s.task != Task::kProgression) {
            throw ValidationError("progression answer for a non-progression stimulus");
          }
          for (int v : a.severities) {
            if (v < 1 || v > 4) throw ValidationError("severities must be in 1..4");
          }
          if (a.plausibility < 1 || a.plausibility > 5) {
            throw ValidationError("plausibility must be in 1..5");
          }
        } else {
          if (a.task != s.task) throw ValidationError("finish_task for a different task");
        }
      },
      answer);
}

ResponseSubmission submission_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("response must be an object");
  ResponseSubmission sub;
  const std::string kind = field<std::string>(j, "kind");
  if (j.contains("elapsed_ms")) sub.elapsed_ms = field<std::int64_t>(j, "elapsed_ms");
  if (sub.elapsed_ms < 0) throw ValidationError("elapsed_ms must be >= 0");
  if (kind == "finish_task") {
    sub.answer = FinishTask{parse_task(field<std::string>(j, "task"))};
    return sub;
  }
  sub.stimulus_id = field<std::string>(j, "stimulus");
  if (kind == "turing") {
    sub.answer = TuringAnswer{parse_provenance(field<std::string>(j, "verdict")),
                              field<int>(j, "difficulty")};
  } else if (kind == "ranking") {
    sub.answer = RankingAnswer{field<std::vector<std::string>>(j, "order")};
  } else if (kind == "progression") {
    const auto sev = field<std::vector<int>>(j, "severities");
    if (sev.size() != kProgressionSize) throw ValidationError("severities must have five entries");
    ProgressionAnswer a;
    std::copy(sev.begin(), sev.end(), a.severities.begin());
    a.plausibility = field<int>(j, "plausibility");
    sub.answer = a;
  } else {
    throw ValidationError("unknown response kind '" + kind + "'");
  }
  return sub;
}

namespace {

void put_answer(json& j, const Answer& answer) {
  std::visit(
      [&](const auto& a) {
        using A = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<A, TuringAnswer>) {
          j["kind"] = "turing";
          j["verdict"] = to_string(a.verdict);
          j["difficulty"] = a.difficulty;
        } else if constexpr (std::is_same_v<A, RankingAnswer>) {
          j["kind"] = "ranking";
          j["order"] = a.order;
        } else if constexpr (std::is_same_v<A, ProgressionAnswer>) {
          j["kind"] = "progression";
          j["severities"] = a.severities;
          j["plausibility"] = a.plausibility;
        } else {
          j["kind"] = "finish_task";
          j["task"] = to_string(a.task);
        }
      },
      answer);
}

}  // namespace

json to_json(const ResponseSubmission& sub) {
  json j;
  put_answer(j, sub.answer);
  if (!std::holds_alternative<FinishTask>(sub.answer)) j["stimulus"] = sub.stimulus_id;
  j["elapsed_ms"] = sub.elapsed_ms;
  return j;
}

Task LogRecord::task() const {
  if (const auto* f = std::get_if<FinishTask>(&answer)) return f->task;
  if (std::holds_alternative<RankingAnswer>(answer)) return Task::kRanking;
  if (std::holds_alternative<ProgressionAnswer>(answer)) return Task::kProgression;
  return Task::kTuring;
}

json to_json(const LogRecord& r) {
  json j;
  j["record"] = "response";
  j["seq"] = r.seq;
  j["session"] = r.session;
  j["user"] = r.user_id;
  j["stimulus"] = r.stimulus_id;
  j["images"] = r.image_ids;
  put_answer(j, r.answer);
  j["elapsed_ms"] = r.elapsed_ms;
  j["truth"] = truth_json(r.truth);
  return j;
}

LogRecord record_from_json(const json& j) {
  LogRecord r;
  r.seq = j.at("seq").get<std::int64_t>();
  r.session = j.at("session").get<int>();
  r.user_id = j.at("user").get<std::string>();
  r.stimulus_id = j.at("stimulus").get<std::string>();
  r.image_ids = j.at("images").get<std::vector<std::string>>();
  ResponseSubmission sub = submission_from_json(j);
  r.answer = std::move(sub.answer);
  r.elapsed_ms = sub.elapsed_ms;
  r.truth = truth_from_json(j.at("truth"));
  return r;
}

json to_json(const LogHeader& h) {
  return {{"record", "header"},
          {"schema", h.schema},
          {"experiment", h.experiment},
          {"config_hash", h.config_hash}};
}

std::string serialize_log(const ResponseLog& log) {
  std::string out = to_json(log.header).dump() + '\n';
  for (const LogRecord& r : log.records) out += to_json(r).dump() + '\n';
  return out;
}

ResponseLog parse_log(std::string_view jsonl) {
  ResponseLog log;
  bool have_header = false;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(pos, end - pos);
    const std::size_t offset = pos;
    pos = end + 1;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string kind = j.at("record").get<std::string>();
      if (kind == "header") {
        if (have_header) throw FormatError("duplicate header record", offset);
        log.header = {j.at("schema").get<std::string>(), j.at("experiment").get<std::string>(),
                      j.at("config_hash").get<std::string>()};
        if (log.header.schema != kLogSchema) {
          throw FormatError("unsupported log schema '" + log.header.schema + "'", offset);
        }
        have_header = true;
      } else if (kind == "response") {
        if (!have_header) throw FormatError("response before header", offset);
        log.records.push_back(record_from_json(j));
      } else {
        throw FormatError("unknown record type '" + kind + "'", offset);
      }
    } catch (const json::exception& e) {
      throw FormatError(std::string("malformed log line: ") + e.what(), offset);
    } catch (const ValidationError& e) {
      throw FormatError(std::string("invalid log record: ") + e.what(), offset);
    }
  }
  if (!have_header) throw FormatError("missing header record", 0);
  return log;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace latentatlas::study
