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

#include "latentatlas/study_service.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include "latentatlas/errors.hpp"
#include "latentatlas/image_io.hpp"
#include "latentatlas/rng.hpp"

namespace latentatlas::study {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string image_hash(const Image& img) {
  const std::vector<std::uint8_t> rgb = img.to_rgb8();
  return fnv1a_hex(std::string_view(reinterpret_cast<const char*>(rgb.data()), rgb.size()));
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string random_token() {
  std::random_device rd;
  std::uniform_int_distribution<std::uint64_t> dist;
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                static_cast<unsigned long long>(dist(rd)),
                static_cast<unsigned long long>(dist(rd)));
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::shuffle(v.begin(), v.end(), rng);
}

// Append-only JSONL file. Each append writes the full journal to a temporary
// segment and renames it over the previous one, so readers never observe a
// partial line.
class Journal {
 public:
  Journal() = default;
  explicit Journal(fs::path path) : path_(std::move(path)) {}

  bool load() {
    if (path_.empty() || !fs::exists(path_)) return false;
    content_ = read_text(path_);
    return true;
  }

  void append(const std::string& line) {
    std::string next = content_ + line + '\n';
    if (!path_.empty()) {
      const fs::path tmp = path_.string() + ".tmp";
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open journal segment", tmp.string());
        out << next;
        out.flush();
        if (!out) throw IoError("journal write failed", tmp.string());
      }
      std::error_code ec;
      fs::rename(tmp, path_, ec);
      if (ec) throw IoError("journal rename failed (" + ec.message() + ")", path_.string());
    }
    content_ = std::move(next);
  }

  const std::string& content() const { return content_; }

 private:
  fs::path path_;
  std::string content_;
};

std::optional<Category> optional_category(const json& j) {
  if (!j.contains("category") || j["category"].is_null()) return std::nullopt;
  return parse_category(j["category"].get<std::string>());
}

std::vector<PoolImage> load_pool(const json& spec, const fs::path& base) {
  std::vector<PoolImage> pool;
  if (spec.is_string()) {
    const fs::path dir = base / spec.get<std::string>();
    if (!fs::is_directory(dir)) throw IoError("pool directory not found", dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) pool.push_back({f.filename().string(), read_png(f), {}});
    return pool;
  }
  for (const json& e : spec) {
    const std::string file = e.at("file").get<std::string>();
    PoolImage img;
    img.name = e.value("name", file);
    img.image = read_png(base / file);
    img.category = optional_category(e);
    pool.push_back(std::move(img));
  }
  return pool;
}

}  // namespace

json describe(const ExperimentConfig& c) {
  json j;
  j["id"] = c.id;
  j["seed"] = c.seed;
  json tasks = json::array();
  for (Task t : c.tasks) tasks.push_back(to_string(t));
  j["tasks"] = tasks;
  auto pool = [](const std::vector<PoolImage>& images) {
    json arr = json::array();
    for (const PoolImage& p : images) {
      arr.push_back({{"name", p.name},
                     {"category", p.category ? json(to_string(*p.category)) : json(nullptr)},
                     {"hash", image_hash(p.image)}});
    }
    return arr;
  };
  j["real"] = pool(c.real);
  j["generated"] = pool(c.generated);
  json progs = json::array();
  for (const ProgressionSpec& p : c.progressions) {
    json frames = json::array();
    for (const Image& img : p.images) frames.push_back(image_hash(img));
    progs.push_back({{"name", p.name},
                     {"category", p.category ? json(to_string(*p.category)) : json(nullptr)},
                     {"direction", p.direction ? json(*p.direction) : json(nullptr)},
                     {"frames", frames}});
  }
  j["progressions"] = progs;
  j["turing"] = {{"count", c.turing_count}, {"common", c.common_count}, {"min_images", c.min_images}};
  j["ranking"] = {{"count", c.ranking_count}, {"with_replacement", c.ranking_with_replacement}};
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  return fnv1a_hex(describe(config).dump());
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  const fs::path base = path.parent_path();
  try {
    const json j = json::parse(read_text(path));
    ExperimentConfig c;
    c.id = j.at("id").get<std::string>();
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("tasks")) {
      c.tasks.clear();
      for (const json& t : j["tasks"]) c.tasks.push_back(parse_task(t.get<std::string>()));
    }
    const json& pools = j.at("pools");
    if (pools.contains("real")) c.real = load_pool(pools["real"], base);
    if (pools.contains("generated")) c.generated = load_pool(pools["generated"], base);
    for (const json& p : j.value("progressions", json::array())) {
      ProgressionSpec spec;
      spec.name = p.at("id").get<std::string>();
      for (const json& f : p.at("files")) spec.images.push_back(read_png(base / f.get<std::string>()));
      spec.category = optional_category(p);
      if (p.contains("direction") && !p["direction"].is_null()) spec.direction = p["direction"].get<int>();
      c.progressions.push_back(std::move(spec));
    }
    if (j.contains("turing")) {
      const json& t = j["turing"];
      c.turing_count = t.value("count", c.turing_count);
      c.common_count = t.value("common", c.common_count);
      c.min_images = t.value("min_images", c.min_images);
    }
    if (j.contains("ranking")) {
      c.ranking_count = j["ranking"].value("count", c.ranking_count);
      c.ranking_with_replacement = j["ranking"].value("with_replacement", false);
    }
    return c;
  } catch (const json::exception& e) {
    throw InvalidInput("malformed experiment config " + path.string() + ": " + e.what());
  }
}

std::string image_id(const std::string& experiment, std::string_view pool,
                     const std::string& name) {
  std::string key = experiment;
  key += '\x1f';
  key += pool;
  key += '\x1f';
  key += name;
  return fnv1a_hex(key);
}

std::vector<Stimulus> build_ranking_sets(std::span<const std::string> real_ids,
                                         std::span<const std::string> gen_ids, int count,
                                         std::uint64_t seed, bool with_replacement) {
  if (count < 0) throw InvalidInput("ranking set count must be >= 0");
  const std::size_t need = 2 * static_cast<std::size_t>(count);
  if (count > 0 && (real_ids.size() < 2 || gen_ids.size() < 2)) {
    throw InvalidInput("ranking sets need at least two real and two generated images");
  }
  if (!with_replacement && (real_ids.size() < need || gen_ids.size() < need)) {
    throw InvalidInput("ranking pools too small: " + std::to_string(count) + " sets need " +
                       std::to_string(need) + " real and " + std::to_string(need) +
                       " generated images");
  }
  if (with_replacement && (real_ids.size() < need || gen_ids.size() < need)) {
    spdlog::warn("ranking sets reuse images across sets ({} sets, pools {}/{})", count,
                 real_ids.size(), gen_ids.size());
  }

  std::mt19937_64 rng(seed);
  std::vector<std::string> reals(real_ids.begin(), real_ids.end());
  std::vector<std::string> gens(gen_ids.begin(), gen_ids.end());
  std::shuffle(reals.begin(), reals.end(), rng);
  std::shuffle(gens.begin(), gens.end(), rng);

  std::vector<Stimulus> sets;
  for (int i = 0; i < count; ++i) {
    std::vector<std::pair<std::string, Provenance>> items;
    if (with_replacement) {
      std::vector<std::string> r = reals, g = gens;
      std::shuffle(r.begin(), r.end(), rng);
      std::shuffle(g.begin(), g.end(), rng);
      items = {{r[0], Provenance::kReal}, {r[1], Provenance::kReal},
               {g[0], Provenance::kGenerated}, {g[1], Provenance::kGenerated}};
    } else {
      const std::size_t k = 2 * static_cast<std::size_t>(i);
      items = {{reals[k], Provenance::kReal}, {reals[k + 1], Provenance::kReal},
               {gens[k], Provenance::kGenerated}, {gens[k + 1], Provenance::kGenerated}};
    }
    std::shuffle(items.begin(), items.end(), rng);
    Stimulus s;
    char id[32];
    std::snprintf(id, sizeof(id), "rank-%03d", i);
    s.id = id;
    s.task = Task::kRanking;
    for (auto& [img, prov] : items) {
      s.image_ids.push_back(img);
      s.truth.provenance.push_back(prov);
    }
    validate(s);
    sets.push_back(std::move(s));
  }
  return sets;
}

struct StudyService::Experiment {
  ExperimentConfig config;
  std::string hash;
  std::vector<Stimulus> stimuli;
  std::map<std::string, std::size_t> by_id;
  std::map<Task, std::vector<std::size_t>> by_task;
  std::set<std::size_t> common;
  std::map<std::string, const Image*> images;
  Journal log;
  Journal sessions;
  std::vector<LogRecord> records;
  int next_session = 0;

  void add_stimulus(Stimulus s) {
    validate(s);
    by_task[s.task].push_back(stimuli.size());
    by_id.emplace(s.id, stimuli.size());
    stimuli.push_back(std::move(s));
  }

  void add_image(const std::string& id, const Image* img) {
    if (!images.emplace(id, img).second) {
      throw InvalidInput("duplicate image in experiment " + config.id);
    }
  }
};

struct StudyService::Session {
  std::string token;
  int index = 0;
  std::string experiment;
  ExpertProfile profile;
  std::vector<std::size_t> schedule;
  std::set<std::string> answered;
  std::set<Task> finished;
  int turing_answered = 0;
};

StudyService::StudyService(fs::path data_dir) : data_dir_(std::move(data_dir)) {}
StudyService::~StudyService() = default;

void StudyService::add_experiment(ExperimentConfig config) {
  if (config.id.empty()) throw InvalidInput("experiment id must not be empty");
  if (config.min_images < 0 || config.common_count < 0) {
    throw InvalidInput("turing min_images and common must be >= 0");
  }
  std::unique_lock lock(mutex_);
  if (experiments_.count(config.id)) throw Conflict("experiment already registered: " + config.id);

  auto exp = std::make_unique<Experiment>();
  exp->config = std::move(config);
  exp->hash = config_hash(exp->config);
  const ExperimentConfig& c = exp->config;
  const auto has_task = [&](Task t) {
    return std::find(c.tasks.begin(), c.tasks.end(), t) != c.tasks.end();
  };

  std::vector<std::string> real_ids, gen_ids;
  for (const PoolImage& p : c.real) {
    real_ids.push_back(image_id(c.id, "real", p.name));
    exp->add_image(real_ids.back(), &p.image);
  }
  for (const PoolImage& p : c.generated) {
    gen_ids.push_back(image_id(c.id, "generated", p.name));
    exp->add_image(gen_ids.back(), &p.image);
  }

  if (has_task(Task::kTuring)) {
    const auto add = [&](const std::vector<PoolImage>& pool, const std::vector<std::string>& ids,
                         Provenance prov) {
      for (std::size_t i = 0; i < pool.size(); ++i) {
        Stimulus s;
        s.id = "tur-" + ids[i];
        s.task = Task::kTuring;
        s.image_ids = {ids[i]};
        s.truth.provenance = {prov};
        s.truth.category = pool[i].category;
        exp->add_stimulus(std::move(s));
      }
    };
    add(c.real, real_ids, Provenance::kReal);
    add(c.generated, gen_ids, Provenance::kGenerated);
    std::vector<std::size_t> order = exp->by_task[Task::kTuring];
    seeded_shuffle(order, derive_seed(c.seed, 1));
    const std::size_t n_common = std::min<std::size_t>(order.size(), c.common_count);
    exp->common.insert(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_common));
  }
  if (has_task(Task::kRanking)) {
    for (Stimulus& s : build_ranking_sets(real_ids, gen_ids, c.ranking_count,
                                          derive_seed(c.seed, 2), c.ranking_with_replacement)) {
      exp->add_stimulus(std::move(s));
    }
  }
  if (has_task(Task::kProgression)) {
    for (const ProgressionSpec& p : c.progressions) {
      if (p.images.size() != kProgressionSize) {
        throw InvalidInput("progression " + p.name + " must have five frames");
      }
      Stimulus s;
      s.id = "prog-" + image_id(c.id, "progression", p.name);
      s.task = Task::kProgression;
      for (std::size_t k = 0; k < p.images.size(); ++k) {
        const std::string id = image_id(c.id, "progression", p.name + "#" + std::to_string(k));
        exp->add_image(id, &p.images[k]);
        s.image_ids.push_back(id);
        s.truth.provenance.push_back(Provenance::kGenerated);
      }
      s.truth.category = p.category;
      s.truth.sequence = p.name;
      s.truth.direction = p.direction;
      exp->add_stimulus(std::move(s));
    }
  }

  LogHeader header{kLogSchema, c.id, exp->hash};
  if (!data_dir_.empty()) {
    const fs::path dir = data_dir_ / c.id;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create data directory (" + ec.message() + ")", dir.string());
    exp->log = Journal(dir / "responses.jsonl");
    exp->sessions = Journal(dir / "sessions.jsonl");
  }
  std::vector<std::unique_ptr<Session>> restored;
  if (exp->log.load()) {
    ResponseLog log = parse_log(exp->log.content());
    if (log.header != header) {
      throw Conflict("response log " + c.id + " was written under a different experiment config");
    }
    exp->records = std::move(log.records);
    exp->sessions.load();
    std::istringstream lines(exp->sessions.content());
    std::string line;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      auto s = std::make_unique<Session>();
      s->token = j.at("token").get<std::string>();
      s->index = j.at("index").get<int>();
      s->experiment = c.id;
      s->profile = profile_from_json(j.at("profile"));
      rebuild_schedule(*exp, *s);
      exp->next_session = std::max(exp->next_session, s->index + 1);
      restored.push_back(std::move(s));
    }
    for (const LogRecord& r : exp->records) {
      auto it = std::find_if(restored.begin(), restored.end(),
                             [&](const auto& s) { return s->index == r.session; });
      if (it == restored.end()) throw Conflict("response for unknown session in " + c.id);
      Session& s = **it;
      if (const auto* f = std::get_if<FinishTask>(&r.answer)) {
        s.finished.insert(f->task);
      } else {
        s.answered.insert(r.stimulus_id);
        if (r.task() == Task::kTuring) ++s.turing_answered;
      }
    }
    spdlog::info("experiment {}: resumed {} sessions, {} responses", c.id, restored.size(),
                 exp->records.size());
  } else {
    exp->log.append(to_json(header).dump());
  }

  for (auto& s : restored) sessions_.emplace(s->token, std::move(s));
  experiments_.emplace(c.id, std::move(exp));
}

std::vector<std::string> StudyService::experiment_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : experiments_) ids.push_back(id);
  return ids;
}

StudyService::Experiment& StudyService::experiment_locked(const std::string& id) const {
  auto it = experiments_.find(id);
  if (it == experiments_.end()) throw NotFound("unknown experiment: " + id);
  return *it->second;
}

StudyService::Session& StudyService::session_locked(const std::string& token) const {
  auto it = sessions_.find(token);
  if (it == sessions_.end()) throw Unauthorized("unknown session token");
  return *it->second;
}

void StudyService::rebuild_schedule(const Experiment& exp, Session& s) const {
  const ExperimentConfig& c = exp.config;
  std::mt19937_64 rng(derive_seed(c.seed, 1000 + static_cast<std::uint64_t>(s.index)));
  s.schedule.clear();
  for (Task t : c.tasks) {
    auto it = exp.by_task.find(t);
    if (it == exp.by_task.end()) continue;
    std::vector<std::size_t> part;
    if (t == Task::kTuring) {
      std::vector<std::size_t> rest;
      for (std::size_t i : it->second) {
        (exp.common.count(i) ? part : rest).push_back(i);
      }
      std::shuffle(rest.begin(), rest.end(), rng);
      const std::size_t total = c.turing_count < 0
                                    ? it->second.size()
                                    : std::max<std::size_t>(part.size(), c.turing_count);
      for (std::size_t i = 0; i < rest.size() && part.size() < total; ++i) part.push_back(rest[i]);
    } else {
      part = it->second;
    }
    std::shuffle(part.begin(), part.end(), rng);
    s.schedule.insert(s.schedule.end(), part.begin(), part.end());
  }
}

std::string StudyService::create_session(const ExpertProfile& profile,
                                         const std::string& experiment_id) {
  validate(profile);
  std::unique_lock lock(mutex_);
  Experiment& exp = experiment_locked(experiment_id);
  auto s = std::make_unique<Session>();
  do {
    s->token = random_token();
  } while (sessions_.count(s->token));
  s->index = exp.next_session;
  s->experiment = experiment_id;
  s->profile = profile;
  rebuild_schedule(exp, *s);
  const json record = {{"token", s->token},
                       {"index", s->index},
                       {"experiment", experiment_id},
                       {"profile", to_json(profile)},
                       {"created", utc_now()}};
  exp.sessions.append(record.dump());
  ++exp.next_session;
  const std::string token = s->token;
  sessions_.emplace(token, std::move(s));
  return token;
}

SessionInfo StudyService::session(const std::string& token) const {
  std::shared_lock lock(mutex_);
  const Session& s = session_locked(token);
  return {s.token, s.index, s.experiment, s.profile.user_id, s.schedule.size(), s.answered.size()};
}

const Stimulus* StudyService::pending_locked(const Session& s) const {
  const Experiment& exp = experiment_locked(s.experiment);
  for (std::size_t i : s.schedule) {
    const Stimulus& st = exp.stimuli[i];
    if (s.finished.count(st.task) || s.answered.count(st.id)) continue;
    return &st;
  }
  return nullptr;
}

std::optional<Stimulus> StudyService::next_stimulus(const std::string& token) const {
  std::shared_lock lock(mutex_);
  const Stimulus* st = pending_locked(session_locked(token));
  if (!st) return std::nullopt;
  return *st;
}

std::int64_t StudyService::submit_response(const std::string& token,
                                           const ResponseSubmission& sub) {
  std::unique_lock lock(mutex_);
  Session& s = session_locked(token);
  Experiment& exp = experiment_locked(s.experiment);

  LogRecord r;
  r.seq = static_cast<std::int64_t>(exp.records.size());
  r.session = s.index;
  r.user_id = s.profile.user_id;
  r.answer = sub.answer;
  r.elapsed_ms = sub.elapsed_ms;
  if (r.elapsed_ms < 0) throw ValidationError("elapsed_ms must be >= 0");

  if (const auto* f = std::get_if<FinishTask>(&sub.answer)) {
    if (f->task != Task::kTuring) throw ValidationError("only the turing task can end early");
    if (s.finished.count(f->task)) throw Conflict("task already finished");
    std::size_t scheduled = 0;
    for (std::size_t i : s.schedule) scheduled += exp.stimuli[i].task == Task::kTuring;
    const int required = std::min<int>(exp.config.min_images, static_cast<int>(scheduled));
    if (s.turing_answered < required) {
      throw ValidationError("at least " + std::to_string(required) +
                            " turing images must be rated before finishing");
    }
  } else {
    auto it = exp.by_id.find(sub.stimulus_id);
    if (it == exp.by_id.end() ||
        std::find(s.schedule.begin(), s.schedule.end(), it->second) == s.schedule.end()) {
      throw ValidationError("stimulus is not scheduled for this session");
    }
    const Stimulus& st = exp.stimuli[it->second];
    if (s.answered.count(st.id)) throw Conflict("stimulus already answered in this session");
    if (s.finished.count(st.task)) throw Conflict("task already finished in this session");
    validate(sub.answer, st);
    const Stimulus* pending = pending_locked(s);
    if (pending != &st) throw ValidationError("response does not match the pending stimulus");
    r.stimulus_id = st.id;
    r.image_ids = st.image_ids;
    r.truth = st.truth;
  }

  exp.log.append(to_json(r).dump());
  if (const auto* f = std::get_if<FinishTask>(&sub.answer)) {
    s.finished.insert(f->task);
  } else {
    s.answered.insert(r.stimulus_id);
    if (r.task() == Task::kTuring) ++s.turing_answered;
  }
  exp.records.push_back(std::move(r));
  return exp.records.back().seq;
}

std::string StudyService::export_responses(const std::string& experiment_id) const {
  std::shared_lock lock(mutex_);
  const Experiment& exp = experiment_locked(experiment_id);
  for (const LogRecord& r : exp.records) {
    if (r.task() != Task::kRanking || std::holds_alternative<FinishTask>(r.answer)) continue;
    Stimulus s{r.stimulus_id, Task::kRanking, r.image_ids, r.truth};
    validate(s);
  }
  return exp.log.content();
}

std::vector<LogRecord> StudyService::records(const std::string& experiment_id) const {
  std::shared_lock lock(mutex_);
  return experiment_locked(experiment_id).records;
}

std::vector<Stimulus> StudyService::stimuli(const std::string& experiment_id, Task task) const {
  std::shared_lock lock(mutex_);
  const Experiment& exp = experiment_locked(experiment_id);
  std::vector<Stimulus> out;
  auto it = exp.by_task.find(task);
  if (it != exp.by_task.end()) {
    for (std::size_t i : it->second) out.push_back(exp.stimuli[i]);
  }
  return out;
}

std::vector<std::string> StudyService::common_stimuli(const std::string& experiment_id) const {
  std::shared_lock lock(mutex_);
  const Experiment& exp = experiment_locked(experiment_id);
  std::vector<std::string> ids;
  for (std::size_t i : exp.common) ids.push_back(exp.stimuli[i].id);
  return ids;
}

std::vector<std::uint8_t> StudyService::image_png(const std::string& id) const {
  const Image* img = nullptr;
  {
    std::shared_lock lock(mutex_);
    for (const auto& [_, exp] : experiments_) {
      auto it = exp->images.find(id);
      if (it != exp->images.end()) {
        img = it->second;
        break;
      }
    }
  }
  if (!img) throw NotFound("unknown image: " + id);
  return encode_png(*img);
}

}  // namespace latentatlas::study
