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
#include <sstream>

#include "latentatlas/analysis.hpp"
#include "support/study_fixture.hpp"

using namespace latentatlas;
using namespace latentatlas::study;
using latentatlas::testing::profile;
using latentatlas::testing::SimulatedRater;
using latentatlas::testing::small_experiment;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

StudyService& cohort(StudyService& svc, int raters) {
  svc.add_experiment(small_experiment("e1", 8, 8, 3, 4));
  for (int u = 0; u < raters; ++u) {
    const std::string token = svc.create_session(profile("rater" + std::to_string(u)), "e1");
    SimulatedRater rater{std::mt19937_64(100 + u), 0.5 + 0.05 * u};
    while (auto st = svc.next_stimulus(token)) {
      svc.submit_response(token, {st->id, rater.answer(*st), 700});
    }
  }
  return svc;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("analysis of an exported log equals in-process analysis") {
  StudyService svc;
  cohort(svc, 4);
  const nlohmann::json direct = analyze(svc.records("e1"));
  const ResponseLog parsed = parse_log(svc.export_responses("e1"));
  const nlohmann::json from_log = analyze(parsed.records);
  CHECK(direct.dump() == from_log.dump());
  const nlohmann::json with_header = analyze(parsed);
  CHECK(with_header.at("experiment") == "e1");
  CHECK(with_header.at("config_hash") == parsed.header.config_hash);
  CHECK(direct.at("schema") == "study-report/1");
  CHECK(direct.at("turing").at("users").size() == 4);
  CHECK(direct.at("ranking").at("users")[0].at("n_sets") == 4);
  CHECK(direct.at("progression").at("users")[0].at("n_sequences") == 3);
  CHECK(direct.at("turing").at("agreement").at("n_common_items") == 16);
}

TEST_CASE("sections without data are null") {
  const nlohmann::json empty = analyze(std::vector<LogRecord>{});
  CHECK(empty.at("turing").is_null());
  CHECK(empty.at("ranking").is_null());
  CHECK(empty.at("progression").is_null());
  CHECK(empty.at("n_records") == 0);

  StudyService svc;
  cohort(svc, 1);
  const nlohmann::json one = analyze(svc.records("e1"));
  CHECK(one.at("turing").at("agreement").contains("undefined"));
}

TEST_CASE("wilson option adds an interval") {
  StudyService svc;
  cohort(svc, 2);
  const nlohmann::json r = analyze(svc.records("e1"), {true, CiMethod::kWilson});
  CHECK(r.at("turing").at("users")[0].contains("detection_wilson"));
}

TEST_CASE("csv tables") {
  StudyService svc;
  cohort(svc, 3);
  const nlohmann::json report = analyze(svc.records("e1"));
  const auto dir = std::filesystem::temp_directory_path() / "latentatlas_csv_test";
  std::filesystem::remove_all(dir);
  write_csv_tables(report, dir);
  for (const char* f : {"detection.csv", "ranking.csv", "progression.csv", "agreement.csv",
                        "difficulty.csv", "plausibility_rolling.csv"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  const std::string t1 = read_file(dir / "detection.csv");
  CHECK(t1.rfind("user,n,proportion,ci_lo,ci_hi,p_value,p_exact\n", 0) == 0);
  CHECK(t1.find("\nAverage,24,") != std::string::npos);
  const std::string t2 = read_file(dir / "ranking.csv");
  CHECK(std::count(t2.begin(), t2.end(), '\n') == 4);
  const std::string diff = read_file(dir / "difficulty.csv");
  CHECK(std::count(diff.begin(), diff.end(), '\n') == 1 + 4 * 5);
  const std::string agree = read_file(dir / "agreement.csv");
  CHECK(agree.find("rater0,rater0,1.000000") != std::string::npos);
  const std::string roll = read_file(dir / "plausibility_rolling.csv");
  CHECK(std::count(roll.begin(), roll.end(), '\n') == 1 + 3 * 3);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
