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

// Statistics over study responses: proportion tests, inter-rater agreement,
// ranking percentages, progression monotonicity and plausibility.

#include <Eigen/Dense>

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latentatlas/study_types.hpp"

namespace latentatlas::study {

enum class TestMethod { kWaldZ, kExactBinomial };
enum class CiMethod { kWald, kWilson };
const char* to_string(TestMethod m);

/// `ci_lo`/`ci_hi` are the 95% interval for p_hat (Wald unless Wilson was
/// requested), clipped to [0, 1]. For the exact test `z` is the Wald z.
struct ProportionTestResult {
  double p_hat = 0.0;
  int n = 0;
  double z = 0.0;
  double p_two_sided = 1.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  TestMethod method = TestMethod::kWaldZ;
};

/// Standard normal CDF.
double normal_cdf(double x);

ProportionTestResult one_prop_ztest(int successes, int n, double p0 = 0.5,
                                    CiMethod ci = CiMethod::kWald);
ProportionTestResult one_prop_ztest_phat(double p_hat, int n, double p0 = 0.5,
                                         CiMethod ci = CiMethod::kWald);

/// Two-sided: sums pmf(i) over every i with pmf(i) <= pmf(k) * (1 + 1e-12).
ProportionTestResult exact_binomial_test(int k, int n, double p0 = 0.5);

/// items x raters; nullopt marks a missing rating. Nominal level.
using RatingTable = std::vector<std::vector<std::optional<int>>>;

/// Coincidence-matrix Krippendorff alpha. Items with fewer than two ratings
/// are ignored. Throws Undefined when no item has two ratings; returns 1.0
/// when every pairable value is identical.
double krippendorff_alpha(const RatingTable& ratings);

struct AgreementMatrix {
  std::vector<std::string> raters;
  Eigen::MatrixXd pairwise;  // diagonal 1
  double overall = 0.0;
  int n_common_items = 0;
};

/// Turing verdicts coded 0 (real) / 1 (generated). With `common_only` only
/// stimuli rated by every rater count.
AgreementMatrix agreement_matrix(std::span<const LogRecord> records, bool common_only = true);

struct TuringUserSummary {
  std::string user;
  int n_images = 0;
  int n_generated = 0;
  int detected = 0;  // generated images judged generated
  int correct = 0;   // all images judged correctly
  std::optional<ProportionTestResult> detection;  // absent without generated images
  std::optional<ProportionTestResult> detection_exact;
  double accuracy_all = 0.0;
  std::array<int, 5> difficulty{};  // counts for ratings 1..5
};

struct MajorityWrong {
  std::string stimulus;
  std::string image;
  Provenance truth = Provenance::kReal;
  int wrong = 0;
  int responding = 0;
};

struct TuringSummary {
  std::vector<TuringUserSummary> users;  // sorted by user id
  std::optional<ProportionTestResult> pooled;
  int total_images = 0;
  std::vector<MajorityWrong> majority_wrong;  // sorted by stimulus id
};

TuringSummary turing_summary(std::span<const LogRecord> records);

struct RankingUserStats {
  std::string user;
  int n_sets = 0;
  int first_generated = 0;
  int both_generated = 0;
  double pct_first = 0.0;  // percent
  double pct_both = 0.0;
};

/// Throws ValidationError on a set that is not 2 real + 2 generated or whose
/// order is not a permutation of its images.
std::vector<RankingUserStats> ranking_stats(std::span<const LogRecord> records);

struct SlopeResult {
  double slope = 0.0;
  double angle_deg = 0.0;
};

/// Least-squares slope of rating against index 1..n; ratings must be in 1..4.
SlopeResult progression_slope(std::span<const int> severities);

/// `slope` is the arithmetic mean of per-sequence slopes and `angle_deg` its
/// arctangent in degrees; `mean_angle_deg` averages the per-sequence angles.
struct MonotonicityResult {
  double slope = 0.0;
  double angle_deg = 0.0;
  double mean_angle_deg = 0.0;
  std::vector<SlopeResult> per_sequence;
};

MonotonicityResult summarize_slopes(std::vector<SlopeResult> per_sequence);

struct ProgressionUserSummary {
  std::string user;
  MonotonicityResult monotonicity;
  double mean_plausibility = 0.0;
  int n_sequences = 0;
};

std::vector<ProgressionUserSummary> progression_summary(std::span<const LogRecord> records);

inline const std::array<const char*, 5> kPlausibilityLabels = {
    "Very Unlikely", "Unlikely", "Neutral", "Likely", "Very Likely"};

struct PlausibilitySummary {
  std::map<std::string, double> per_user;
  double overall = 0.0;
  int n = 0;
  std::map<std::string, std::array<int, 5>> per_sequence;  // keyed by sequence id
};

/// Throws NoData without progression responses.
PlausibilitySummary plausibility_summary(std::span<const LogRecord> records);

/// Trailing mean; the first window-1 outputs average the available prefix.
std::vector<double> rolling_mean(std::span<const double> series, int window = 5);

struct DifficultyOutlier {
  std::string stimulus;
  std::string user;
  bool operator==(const DifficultyOutlier&) const = default;
};

struct DifficultyByCategory {
  std::map<Category, std::array<int, 5>> histograms;  // all four categories present
  std::vector<DifficultyOutlier> outliers;            // difficulty 1, in log order
  int excluded = 0;                                   // uncategorized generates
};

/// Turing responses on generated stimuli, split by stimulus category.
DifficultyByCategory difficulty_by_category(std::span<const LogRecord> records);

}  // namespace latentatlas::study
