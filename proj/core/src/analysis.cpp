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

#include "latentatlas/analysis.hpp"

#include <cstdio>
#include <fstream>

#include "latentatlas/errors.hpp"

namespace latentatlas::study {
namespace {

using nlohmann::json;

json test_json(const ProportionTestResult& r) {
  return {{"p_hat", r.p_hat},       {"n", r.n},           {"z", r.z},
          {"p_value", r.p_two_sided}, {"ci95", {r.ci_lo, r.ci_hi}}, {"method", to_string(r.method)}};
}

json optional_test(const std::optional<ProportionTestResult>& r) {
  return r ? test_json(*r) : json(nullptr);
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& header)
      : path_(path), out_(path) {
    if (!out_) throw IoError("cannot open for writing", path.string());
    out_ << header << '\n';
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_field(fields[i]);
    }
    out_ << '\n';
    if (!out_) throw IoError("write failed", path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

json turing_section(std::span<const LogRecord> records, const AnalysisOptions& options) {
  const TuringSummary s = turing_summary(records);
  if (s.users.empty()) return nullptr;
  json users = json::array();
  for (const TuringUserSummary& u : s.users) {
    json row = {{"user", u.user},
                {"n_images", u.n_images},
                {"n_generated", u.n_generated},
                {"detected", u.detected},
                {"correct", u.correct},
                {"accuracy_all", u.accuracy_all},
                {"detection", optional_test(u.detection)},
                {"detection_exact", optional_test(u.detection_exact)},
                {"difficulty", u.difficulty}};
    if (options.ci == CiMethod::kWilson && u.n_generated > 0) {
      row["detection_wilson"] = test_json(one_prop_ztest(u.detected, u.n_generated, 0.5, CiMethod::kWilson));
    }
    users.push_back(row);
  }
  json wrong = json::array();
  for (const MajorityWrong& m : s.majority_wrong) {
    wrong.push_back({{"stimulus", m.stimulus},
                     {"image", m.image},
                     {"truth", to_string(m.truth)},
                     {"wrong", m.wrong},
                     {"responding", m.responding}});
  }
  json section = {{"users", users},
                  {"pooled", optional_test(s.pooled)},
                  {"total_images", s.total_images},
                  {"majority_wrong", wrong}};

  const DifficultyByCategory d = difficulty_by_category(records);
  json hist = json::object();
  for (const auto& [cat, counts] : d.histograms) hist[to_string(cat)] = counts;
  json outliers = json::array();
  for (const DifficultyOutlier& o : d.outliers) outliers.push_back({{"stimulus", o.stimulus}, {"user", o.user}});
  section["difficulty_by_category"] = {{"histograms", hist}, {"outliers", outliers}, {"excluded", d.excluded}};

  try {
    const AgreementMatrix m = agreement_matrix(records, options.common_only);
    json pairwise = json::array();
    for (Eigen::Index i = 0; i < m.pairwise.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < m.pairwise.cols(); ++j) row.push_back(m.pairwise(i, j));
      pairwise.push_back(row);
    }
    section["agreement"] = {{"raters", m.raters},
                            {"pairwise", pairwise},
                            {"overall", m.overall},
                            {"n_common_items", m.n_common_items},
                            {"common_only", options.common_only}};
  } catch (const Undefined& e) {
    section["agreement"] = {{"undefined", e.what()}};
  }
  return section;
}

json ranking_section(std::span<const LogRecord> records) {
  const std::vector<RankingUserStats> stats = ranking_stats(records);
  if (stats.empty()) return nullptr;
  json users = json::array();
  for (const RankingUserStats& u : stats) {
    users.push_back({{"user", u.user},
                     {"n_sets", u.n_sets},
                     {"first_generated", u.first_generated},
                     {"both_generated", u.both_generated},
                     {"pct_first_generate", u.pct_first},
                     {"pct_both_generates", u.pct_both}});
  }
  return {{"users", users}};
}

json progression_section(std::span<const LogRecord> records) {
  const std::vector<ProgressionUserSummary> summary = progression_summary(records);
  if (summary.empty()) return nullptr;
  const PlausibilitySummary plaus = plausibility_summary(records);
  json users = json::array();
  for (const ProgressionUserSummary& u : summary) {
    json seqs = json::array();
    for (const SlopeResult& s : u.monotonicity.per_sequence) {
      seqs.push_back({{"slope", s.slope}, {"angle_deg", s.angle_deg}});
    }
    std::vector<double> series;
    for (const LogRecord& r : records) {
      if (r.user_id != u.user) continue;
      if (const auto* a = std::get_if<ProgressionAnswer>(&r.answer)) series.push_back(a->plausibility);
    }
    users.push_back({{"user", u.user},
                     {"n_sequences", u.n_sequences},
                     {"avg_slope", u.monotonicity.slope},
                     {"angle_deg", u.monotonicity.angle_deg},
                     {"mean_angle_deg", u.monotonicity.mean_angle_deg},
                     {"mean_plausibility", u.mean_plausibility},
                     {"plausibility_series", series},
                     {"plausibility_rolling", rolling_mean(series, kRollingWindow)},
                     {"sequences", seqs}});
  }
  json per_sequence = json::object();
  for (const auto& [seq, counts] : plaus.per_sequence) per_sequence[seq] = counts;
  return {{"users", users},
          {"plausibility", {{"overall", plaus.overall},
                            {"n", plaus.n},
                            {"labels", kPlausibilityLabels},
                            {"per_sequence", per_sequence}}}};
}

}  // namespace

json analyze(std::span<const LogRecord> records, const AnalysisOptions& options) {
  return {{"schema", "study-report/1"},
          {"n_records", records.size()},
          {"turing", turing_section(records, options)},
          {"ranking", ranking_section(records)},
          {"progression", progression_section(records)}};
}

json analyze(const ResponseLog& log, const AnalysisOptions& options) {
  json report = analyze(log.records, options);
  report["experiment"] = log.header.experiment;
  report["config_hash"] = log.header.config_hash;
  return report;
}

void write_csv_tables(const json& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory (" + ec.message() + ")", dir.string());

  {
    CsvFile t1(dir / "detection.csv", "user,n,proportion,ci_lo,ci_hi,p_value,p_exact");
    CsvFile diff(dir / "difficulty.csv", "category,level,count");
    CsvFile agree(dir / "agreement.csv", "rater_a,rater_b,alpha");
    const json& tur = report.at("turing");
    if (!tur.is_null()) {
      for (const json& u : tur.at("users")) {
        if (u.at("detection").is_null()) continue;
        const json& d = u["detection"];
        t1.row({u.at("user").get<std::string>(), std::to_string(d.at("n").get<int>()),
                fmt("%.4f", d.at("p_hat").get<double>()), fmt("%.4f", d.at("ci95")[0].get<double>()),
                fmt("%.4f", d.at("ci95")[1].get<double>()), fmt("%.4f", d.at("p_value").get<double>()),
                fmt("%.4f", u.at("detection_exact").at("p_value").get<double>())});
      }
      if (!tur.at("pooled").is_null()) {
        const json& d = tur["pooled"];
        t1.row({"Average", std::to_string(d.at("n").get<int>()), fmt("%.4f", d.at("p_hat").get<double>()),
                fmt("%.4f", d.at("ci95")[0].get<double>()), fmt("%.4f", d.at("ci95")[1].get<double>()),
                fmt("%.4f", d.at("p_value").get<double>()), ""});
      }
      for (const auto& [cat, counts] : tur.at("difficulty_by_category").at("histograms").items()) {
        for (std::size_t level = 0; level < counts.size(); ++level) {
          diff.row({cat, std::to_string(level + 1), std::to_string(counts[level].get<int>())});
        }
      }
      const json& a = tur.at("agreement");
      if (a.contains("pairwise")) {
        const auto raters = a.at("raters").get<std::vector<std::string>>();
        for (std::size_t i = 0; i < raters.size(); ++i) {
          for (std::size_t j = 0; j < raters.size(); ++j) {
            agree.row({raters[i], raters[j], fmt("%.6f", a["pairwise"][i][j].get<double>())});
          }
        }
        agree.row({"overall", "", fmt("%.6f", a.at("overall").get<double>())});
      }
    }
  }
  {
    CsvFile t2(dir / "ranking.csv", "user,n_sets,pct_first_generate,pct_both_generates");
    const json& rk = report.at("ranking");
    if (!rk.is_null()) {
      for (const json& u : rk.at("users")) {
        t2.row({u.at("user").get<std::string>(), std::to_string(u.at("n_sets").get<int>()),
                fmt("%.2f", u.at("pct_first_generate").get<double>()),
                fmt("%.2f", u.at("pct_both_generates").get<double>())});
      }
    }
  }
  {
    CsvFile t3(dir / "progression.csv",
               "user,n_sequences,avg_slope,angle_deg,mean_angle_deg,avg_plausibility");
    CsvFile roll(dir / "plausibility_rolling.csv", "user,index,plausibility,rolling_mean");
    const json& pg = report.at("progression");
    if (!pg.is_null()) {
      for (const json& u : pg.at("users")) {
        const std::string user = u.at("user").get<std::string>();
        t3.row({user, std::to_string(u.at("n_sequences").get<int>()),
                fmt("%.4f", u.at("avg_slope").get<double>()), fmt("%.2f", u.at("angle_deg").get<double>()),
                fmt("%.2f", u.at("mean_angle_deg").get<double>()),
                fmt("%.2f", u.at("mean_plausibility").get<double>())});
        const json& series = u.at("plausibility_series");
        const json& rolling = u.at("plausibility_rolling");
        for (std::size_t i = 0; i < series.size(); ++i) {
          roll.row({user, std::to_string(i + 1), fmt("%g", series[i].get<double>()),
                    fmt("%.4f", rolling[i].get<double>())});
        }
      }
      t3.row({"Average", "", "", "", "",
              fmt("%.2f", pg.at("plausibility").at("overall").get<double>())});
    }
  }
}

}  // namespace latentatlas::study
