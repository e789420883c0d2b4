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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "latentatlas/errors.hpp"
#include "latentatlas/image_io.hpp"
#include "latentatlas/study_service.hpp"
#include "support/study_fixture.hpp"

using namespace latentatlas;
using namespace latentatlas::study;
using latentatlas::testing::profile;
using latentatlas::testing::SimulatedRater;
using latentatlas::testing::small_experiment;

namespace {

int complete_session(StudyService& svc, const std::string& token, SimulatedRater& rater) {
  int n = 0;
  while (auto st = svc.next_stimulus(token)) {
    svc.submit_response(token, {st->id, rater.answer(*st), 1000});
    ++n;
  }
  return n;
}

std::filesystem::path fresh_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("study_service") {

TEST_CASE("profile validation and json") {
  ExpertProfile p = profile("alice");
  p.institution = "General Hospital";
  CHECK(profile_from_json(to_json(p)).institution == p.institution);
  CHECK(profile_from_json(to_json(p)).familiarity == Familiarity::kVeryFamiliar);
  p.user_id = "";
  CHECK_THROWS_AS(validate(p), ValidationError);
  p = profile("bob", -1);
  CHECK_THROWS_AS(validate(p), ValidationError);
  CHECK_THROWS_AS(profile_from_json({{"user_id", "x"}, {"years_experience", 1},
                                     {"wce_familiarity", "guru"}}),
                  ValidationError);
}

TEST_CASE("ranking sets hold two real and two generated images") {
  std::vector<std::string> real, gen;
  for (int i = 0; i < 10; ++i) {
    real.push_back("r" + std::to_string(i));
    gen.push_back("g" + std::to_string(i));
  }
  const auto sets = build_ranking_sets(real, gen, 5, 3);
  REQUIRE(sets.size() == 5);
  std::set<std::string> seen;
  for (const Stimulus& s : sets) {
    CHECK_NOTHROW(validate(s));
    for (const auto& id : s.image_ids) CHECK(seen.insert(id).second);
  }
  CHECK(sets[0].id == "rank-000");
  CHECK(build_ranking_sets(real, gen, 5, 3)[2].image_ids == sets[2].image_ids);
  CHECK_THROWS_AS(build_ranking_sets(real, gen, 6, 3), InvalidInput);
  const auto reused = build_ranking_sets(real, gen, 8, 3, true);
  CHECK(reused.size() == 8);
  for (const Stimulus& s : reused) CHECK_NOTHROW(validate(s));

  Stimulus bad{"x", Task::kRanking, {"a", "b", "c", "d"},
               {{Provenance::kReal, Provenance::kReal, Provenance::kReal, Provenance::kGenerated}}};
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad.truth.provenance[2] = Provenance::kGenerated;
  bad.image_ids[3] = "a";
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("public stimulus json hides ground truth and pool names") {
  StudyService svc;
  svc.add_experiment(small_experiment("e1", 4, 4, 1, 2));
  const std::string token = svc.create_session(profile("u"), "e1");
  const auto st = svc.next_stimulus(token);
  REQUIRE(st.has_value());
  const std::string text = public_json(*st).dump();
  CHECK(text.find("truth") == std::string::npos);
  CHECK(text.find("real") == std::string::npos);
  CHECK(text.find("gen") == std::string::npos);
  CHECK(public_json(*st).size() == 3);
}

TEST_CASE("sessions follow the schedule and reject invalid responses") {
  StudyService svc;
  svc.add_experiment(small_experiment("e1", 4, 4, 2, 2));
  CHECK(svc.experiment_ids() == std::vector<std::string>{"e1"});
  CHECK_THROWS_AS(svc.create_session(profile("u"), "nope"), NotFound);
  const std::string token = svc.create_session(profile("u"), "e1");
  const SessionInfo info = svc.session(token);
  CHECK(info.scheduled == 8 + 2 + 2);
  CHECK(info.index == 0);

  const Stimulus first = *svc.next_stimulus(token);
  CHECK(first.task == Task::kTuring);
  CHECK_THROWS_AS(svc.submit_response("bogus", {first.id, TuringAnswer{}, 0}), Unauthorized);
  CHECK_THROWS_AS(svc.submit_response(token, {"nope", TuringAnswer{}, 0}), ValidationError);
  CHECK_THROWS_AS(svc.submit_response(token, {first.id, TuringAnswer{Provenance::kReal, 9}, 0}),
                  ValidationError);
  CHECK_THROWS_AS(svc.submit_response(token, {first.id, RankingAnswer{}, 0}), ValidationError);
  CHECK_THROWS_AS(svc.submit_response(token, {first.id, TuringAnswer{}, -5}), ValidationError);

  // Out of order: any other scheduled stimulus.
  const auto turing = svc.stimuli("e1", Task::kTuring);
  const auto other = std::find_if(turing.begin(), turing.end(),
                                  [&](const Stimulus& s) { return s.id != first.id; });
  CHECK_THROWS_AS(svc.submit_response(token, {other->id, TuringAnswer{}, 0}), ValidationError);

  CHECK(svc.submit_response(token, {first.id, TuringAnswer{}, 10}) == 0);
  CHECK_THROWS_AS(svc.submit_response(token, {first.id, TuringAnswer{}, 10}), Conflict);
  CHECK(svc.session(token).answered == 1);

  SimulatedRater rater{std::mt19937_64(1)};
  CHECK(complete_session(svc, token, rater) == 11);
  CHECK_FALSE(svc.next_stimulus(token).has_value());
  CHECK(svc.records("e1").size() == 12);
}

TEST_CASE("turing task can end early only after the minimum") {
  auto cfg = small_experiment("e1", 6, 6, 0, 0);
  cfg.tasks = {Task::kTuring};
  cfg.min_images = 3;
  StudyService svc;
  svc.add_experiment(cfg);
  const std::string token = svc.create_session(profile("u"), "e1");
  SimulatedRater rater{std::mt19937_64(2)};
  for (int i = 0; i < 2; ++i) {
    const Stimulus st = *svc.next_stimulus(token);
    svc.submit_response(token, {st.id, rater.answer(st), 0});
  }
  CHECK_THROWS_AS(svc.submit_response(token, {"", FinishTask{Task::kTuring}, 0}), ValidationError);
  CHECK_THROWS_AS(svc.submit_response(token, {"", FinishTask{Task::kRanking}, 0}), ValidationError);
  const Stimulus st = *svc.next_stimulus(token);
  svc.submit_response(token, {st.id, rater.answer(st), 0});
  CHECK_NOTHROW(svc.submit_response(token, {"", FinishTask{Task::kTuring}, 0}));
  CHECK_FALSE(svc.next_stimulus(token).has_value());
  CHECK_THROWS_AS(svc.submit_response(token, {"", FinishTask{Task::kTuring}, 0}), Conflict);
}

TEST_CASE("common subset appears in every schedule") {
  auto cfg = small_experiment("e1", 10, 10, 0, 0);
  cfg.tasks = {Task::kTuring};
  cfg.common_count = 4;
  cfg.turing_count = 8;
  StudyService svc;
  svc.add_experiment(cfg);
  const auto common = svc.common_stimuli("e1");
  REQUIRE(common.size() == 4);
  for (int u = 0; u < 5; ++u) {
    const std::string token = svc.create_session(profile("u" + std::to_string(u)), "e1");
    CHECK(svc.session(token).scheduled == 8);
    SimulatedRater rater{std::mt19937_64(u)};
    complete_session(svc, token, rater);
  }
  std::map<std::string, int> seen;
  for (const LogRecord& r : svc.records("e1")) ++seen[r.stimulus_id];
  for (const auto& id : common) CHECK(seen[id] == 5);
}

TEST_CASE("images are served by opaque id") {
  StudyService svc;
  const auto cfg = small_experiment("e1", 2, 2, 0, 0);
  svc.add_experiment(cfg);
  const std::string id = image_id("e1", "real", "real0");
  CHECK(id.size() == 16);
  CHECK(id.find("real") == std::string::npos);
  CHECK(svc.image_png(id) == encode_png(cfg.real[0].image));
  CHECK_THROWS_AS(svc.image_png("0000000000000000"), NotFound);
}

TEST_CASE("journals survive a restart and reject a changed config") {
  const auto dir = fresh_dir("latentatlas_study_journal");
  std::string token, exported;
  {
    StudyService svc(dir);
    svc.add_experiment(small_experiment("e1", 4, 4, 1, 2));
    token = svc.create_session(profile("u"), "e1");
    SimulatedRater rater{std::mt19937_64(5)};
    for (int i = 0; i < 3; ++i) {
      const Stimulus st = *svc.next_stimulus(token);
      svc.submit_response(token, {st.id, rater.answer(st), 0});
    }
    exported = svc.export_responses("e1");
  }
  {
    StudyService svc(dir);
    svc.add_experiment(small_experiment("e1", 4, 4, 1, 2));
    CHECK(svc.export_responses("e1") == exported);
    CHECK(svc.session(token).answered == 3);
    const std::string second = svc.create_session(profile("v"), "e1");
    CHECK(svc.session(second).index == 1);
    SimulatedRater rater{std::mt19937_64(6)};
    CHECK(complete_session(svc, token, rater) == 8 + 2 + 1 - 3);
  }
  {
    StudyService svc(dir);
    CHECK_THROWS_AS(svc.add_experiment(small_experiment("e1", 4, 5, 1, 2)), Conflict);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("export round trips through the log parser") {
  StudyService svc;
  svc.add_experiment(small_experiment("e1", 4, 4, 1, 2));
  const std::string token = svc.create_session(profile("u"), "e1");
  SimulatedRater rater{std::mt19937_64(7)};
  complete_session(svc, token, rater);
  const std::string log = svc.export_responses("e1");
  const ResponseLog parsed = parse_log(log);
  CHECK(parsed.header.experiment == "e1");
  CHECK(parsed.header.config_hash == config_hash(small_experiment("e1", 4, 4, 1, 2)));
  CHECK(parsed.records == svc.records("e1"));
  CHECK(serialize_log(parsed) == log);
  CHECK(log.find(token) == std::string::npos);
}

TEST_CASE("log parser reports the failing line offset") {
  const std::string header = R"({"record":"header","schema":"study-log/1","experiment":"e","config_hash":"0"})";
  const std::string text = header + "\n{broken\n";
  try {
    parse_log(text);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == header.size() + 1);
  }
  CHECK_THROWS_AS(parse_log(""), FormatError);
  CHECK_THROWS_AS(parse_log(R"({"record":"header","schema":"other/9","experiment":"e","config_hash":"0"})"),
                  FormatError);
}

TEST_CASE("submissions parse from json") {
  auto sub = submission_from_json({{"kind", "turing"}, {"stimulus", "s"}, {"verdict", "generated"},
                                   {"difficulty", 2}, {"elapsed_ms", 30}});
  CHECK(std::get<TuringAnswer>(sub.answer) == TuringAnswer{Provenance::kGenerated, 2});
  CHECK(sub.elapsed_ms == 30);
  sub = submission_from_json({{"kind", "progression"}, {"stimulus", "s"},
                              {"severities", {1, 1, 2, 3, 4}}, {"plausibility", 4}});
  CHECK(std::get<ProgressionAnswer>(sub.answer).severities[4] == 4);
  CHECK(submission_from_json(to_json(sub)).answer == sub.answer);
  CHECK_THROWS_AS(submission_from_json({{"kind", "progression"}, {"stimulus", "s"},
                                        {"severities", {1, 2}}, {"plausibility", 4}}),
                  ValidationError);
  CHECK_THROWS_AS(submission_from_json({{"kind", "dance"}, {"stimulus", "s"}}), ValidationError);
  CHECK_THROWS_AS(submission_from_json({{"kind", "turing"}, {"stimulus", 3}}), ValidationError);
}

TEST_CASE("experiment configs load from disk") {
  const auto dir = fresh_dir("latentatlas_study_config");
  std::filesystem::create_directories(dir / "real");
  nlohmann::json gen = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) {
    write_png(latentatlas::testing::tile(i), dir / "real" / ("r" + std::to_string(i) + ".png"));
    write_png(latentatlas::testing::tile(50 + i), dir / ("g" + std::to_string(i) + ".png"));
    gen.push_back({{"file", "g" + std::to_string(i) + ".png"}, {"category", "debris"}});
  }
  const nlohmann::json cfg = {{"id", "disk"},
                              {"seed", 4},
                              {"tasks", {"turing"}},
                              {"pools", {{"real", "real"}, {"generated", gen}}},
                              {"turing", {{"min_images", 2}, {"common", 2}}}};
  std::ofstream(dir / "exp.json") << cfg.dump();
  const ExperimentConfig c = load_experiment_config(dir / "exp.json");
  CHECK(c.id == "disk");
  CHECK(c.real.size() == 3);
  CHECK(c.generated.size() == 3);
  CHECK(c.generated[0].category == Category::kDebris);
  CHECK(c.min_images == 2);
  CHECK(c.tasks == std::vector<Task>{Task::kTuring});
  CHECK(config_hash(c) == config_hash(load_experiment_config(dir / "exp.json")));
  std::ofstream(dir / "bad.json") << R"({"seed": 1})";
  CHECK_THROWS_AS(load_experiment_config(dir / "bad.json"), InvalidInput);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
