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

#include "latentatlas/study_stats.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "latentatlas/errors.hpp"

namespace latentatlas::study {
namespace {

constexpr double kZ95 = 1.96;

std::pair<double, double> interval(double p_hat, int n, CiMethod method) {
  double lo, hi;
  if (method == CiMethod::kWilson) {
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / n;
    const double centre = (p_hat + z2 / (2.0 * n)) / denom;
    const double half = kZ95 * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / denom;
    lo = centre - half;
    hi = centre + half;
  } else {
    const double half = kZ95 * std::sqrt(p_hat * (1.0 - p_hat) / n);
    lo = p_hat - half;
    hi = p_hat + half;
  }
  return {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
}

double wald_z(double p_hat, int n, double p0) {
  return (p_hat - p0) / std::sqrt(p0 * (1.0 - p0) / n);
}

bool is_verdict(const LogRecord& r) { return std::holds_alternative<TuringAnswer>(r.answer); }

}  // namespace

const char* to_string(TestMethod m) {
  return m == TestMethod::kWaldZ ? "wald_z" : "exact_binomial";
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

ProportionTestResult one_prop_ztest_phat(double p_hat, int n, double p0, CiMethod ci) {
  if (n < 1) throw InvalidInput("one_prop_ztest: n must be >= 1");
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw InvalidInput("one_prop_ztest: p_hat outside [0, 1]");
  if (!(p0 > 0.0 && p0 < 1.0)) throw InvalidInput("one_prop_ztest: p0 must lie in (0, 1)");
  ProportionTestResult r;
  r.p_hat = p_hat;
  r.n = n;
  r.z = wald_z(p_hat, n, p0);
  // 2 * (1 - Phi(|z|)) without cancellation.
  r.p_two_sided = std::min(1.0, std::erfc(std::abs(r.z) / std::numbers::sqrt2));
  std::tie(r.ci_lo, r.ci_hi) = interval(p_hat, n, ci);
  r.method = TestMethod::kWaldZ;
  return r;
}

ProportionTestResult one_prop_ztest(int successes, int n, double p0, CiMethod ci) {
  if (n < 1) throw InvalidInput("one_prop_ztest: n must be >= 1");
  if (successes < 0 || successes > n) throw InvalidInput("one_prop_ztest: successes outside [0, n]");
  return one_prop_ztest_phat(static_cast<double>(successes) / n, n, p0, ci);
}

ProportionTestResult exact_binomial_test(int k, int n, double p0) {
  if (n < 1 || k < 0 || k > n) throw InvalidInput("exact_binomial_test: need 0 <= k <= n, n >= 1");
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw InvalidInput("exact_binomial_test: p0 outside [0, 1]");
  ProportionTestResult r;
  r.p_hat = static_cast<double>(k) / n;
  r.n = n;
  r.method = TestMethod::kExactBinomial;
  std::tie(r.ci_lo, r.ci_hi) = interval(r.p_hat, n, CiMethod::kWald);
  if (p0 == 0.0 || p0 == 1.0) {
    const int certain = p0 == 0.0 ? 0 : n;
    r.p_two_sided = k == certain ? 1.0 : 0.0;
    r.z = k == certain ? 0.0 : std::copysign(HUGE_VAL, r.p_hat - p0);
    return r;
  }
  r.z = wald_z(r.p_hat, n, p0);
  const double lp = std::log(p0), lq = std::log1p(-p0);
  const double lfn = std::lgamma(n + 1.0);
  const auto log_pmf = [&](int i) {
    return lfn - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * lp + (n - i) * lq;
  };
  const double threshold = log_pmf(k) + std::log1p(1e-12);
  double p = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double l = log_pmf(i);
    if (l <= threshold) p += std::exp(l);
  }
  r.p_two_sided = std::min(1.0, p);
  return r;
}

double krippendorff_alpha(const RatingTable& ratings) {
  std::map<int, int> code;
  std::vector<std::vector<int>> units;
  std::set<std::size_t> contributing;
  for (const auto& item : ratings) {
    std::vector<int> values;
    for (std::size_t r = 0; r < item.size(); ++r) {
      if (item[r]) values.push_back(*item[r]);
    }
    if (values.size() < 2) continue;
    for (std::size_t r = 0; r < item.size(); ++r) {
      if (item[r]) contributing.insert(r);
    }
    for (int v : values) code.emplace(v, 0);
    units.push_back(std::move(values));
  }
  if (units.empty() || contributing.size() < 2) {
    throw Undefined("krippendorff_alpha: no item rated by two raters");
  }
  int next = 0;
  for (auto& [_, c] : code) c = next++;
  if (code.size() == 1) {
    spdlog::debug("krippendorff_alpha: all pairable values identical, alpha = 1 by convention");
    return 1.0;
  }

  const auto v = static_cast<Eigen::Index>(code.size());
  Eigen::MatrixXd o = Eigen::MatrixXd::Zero(v, v);
  for (const std::vector<int>& values : units) {
    const double w = 1.0 / static_cast<double>(values.size() - 1);
    for (std::size_t a = 0; a < values.size(); ++a) {
      for (std::size_t b = 0; b < values.size(); ++b) {
        if (a != b) o(code[values[a]], code[values[b]]) += w;
      }
    }
  }
  const Eigen::VectorXd nc = o.rowwise().sum();
  const double n = nc.sum();
  const double observed = o.sum() - o.trace();
  const double expected = nc.sum() * nc.sum() - nc.squaredNorm();
  return 1.0 - (n - 1.0) * observed / expected;
}

AgreementMatrix agreement_matrix(std::span<const LogRecord> records, bool common_only) {
  // First verdict per (user, stimulus).
  std::map<std::string, std::map<std::string, int>> by_user;
  for (const LogRecord& r : records) {
    if (!is_verdict(r)) continue;
    const int code = std::get<TuringAnswer>(r.answer).verdict == Provenance::kGenerated ? 1 : 0;
    by_user[r.user_id].emplace(r.stimulus_id, code);
  }
  if (by_user.size() < 2) throw Undefined("agreement_matrix: at least two raters required");

  std::set<std::string> items;
  for (const auto& [_, verdicts] : by_user) {
    for (const auto& [stimulus, _v] : verdicts) items.insert(stimulus);
  }
  if (common_only) {
    std::erase_if(items, [&](const std::string& s) {
      return std::any_of(by_user.begin(), by_user.end(),
                         [&](const auto& u) { return !u.second.count(s); });
    });
  }
  if (items.empty()) throw Undefined("agreement_matrix: no common items");

  AgreementMatrix m;
  for (const auto& [user, _] : by_user) m.raters.push_back(user);
  m.n_common_items = static_cast<int>(items.size());
  const auto table = [&](const std::vector<std::string>& raters) {
    RatingTable t;
    for (const std::string& s : items) {
      std::vector<std::optional<int>> row;
      for (const std::string& u : raters) {
        const auto& verdicts = by_user.at(u);
        auto it = verdicts.find(s);
        row.push_back(it == verdicts.end() ? std::nullopt : std::optional<int>(it->second));
      }
      t.push_back(std::move(row));
    }
    return t;
  };
  const auto k = static_cast<Eigen::Index>(m.raters.size());
  m.pairwise = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double a = krippendorff_alpha(
          table({m.raters[static_cast<std::size_t>(i)], m.raters[static_cast<std::size_t>(j)]}));
      m.pairwise(i, j) = m.pairwise(j, i) = a;
    }
  }
  m.overall = krippendorff_alpha(table(m.raters));
  return m;
}

TuringSummary turing_summary(std::span<const LogRecord> records) {
  std::map<std::string, TuringUserSummary> users;
  struct Tally {
    std::string image;
    Provenance truth = Provenance::kReal;
    int wrong = 0;
    std::set<std::string> users;
  };
  std::map<std::string, Tally> by_stimulus;
  for (const LogRecord& r : records) {
    if (!is_verdict(r)) continue;
    if (r.truth.provenance.size() != 1 || r.image_ids.size() != 1) {
      throw ValidationError("turing record " + std::to_string(r.seq) + " lacks ground truth");
    }
    const TuringAnswer& a = std::get<TuringAnswer>(r.answer);
    const Provenance truth = r.truth.provenance.front();
    TuringUserSummary& u = users[r.user_id];
    u.user = r.user_id;
    ++u.n_images;
    if (a.difficulty >= 1 && a.difficulty <= 5) ++u.difficulty[static_cast<std::size_t>(a.difficulty - 1)];
    const bool right = a.verdict == truth;
    u.correct += right;
    if (truth == Provenance::kGenerated) {
      ++u.n_generated;
      u.detected += right;
    }
    Tally& t = by_stimulus[r.stimulus_id];
    if (!t.users.insert(r.user_id).second) continue;
    t.image = r.image_ids.front();
    t.truth = truth;
    t.wrong += !right;
  }

  TuringSummary s;
  int pooled_n = 0, pooled_k = 0;
  for (auto& [_, u] : users) {
    u.accuracy_all = static_cast<double>(u.correct) / u.n_images;
    if (u.n_generated > 0) {
      u.detection = one_prop_ztest(u.detected, u.n_generated);
      u.detection_exact = exact_binomial_test(u.detected, u.n_generated);
      pooled_n += u.n_generated;
      pooled_k += u.detected;
    }
    s.total_images += u.n_images;
    s.users.push_back(u);
  }
  if (pooled_n > 0) s.pooled = one_prop_ztest(pooled_k, pooled_n);
  for (const auto& [id, t] : by_stimulus) {
    const int responding = static_cast<int>(t.users.size());
    if (2 * t.wrong > responding) {
      s.majority_wrong.push_back({id, t.image, t.truth, t.wrong, responding});
    }
  }
  return s;
}

std::vector<RankingUserStats> ranking_stats(std::span<const LogRecord> records) {
  std::map<std::string, RankingUserStats> users;
  for (const LogRecord& r : records) {
    const auto* a = std::get_if<RankingAnswer>(&r.answer);
    if (!a) continue;
    const Stimulus s{r.stimulus_id, Task::kRanking, r.image_ids, r.truth};
    validate(s);
    validate(r.answer, s);
    const auto provenance_of = [&](const std::string& img) {
      const auto it = std::find(r.image_ids.begin(), r.image_ids.end(), img);
      return r.truth.provenance[static_cast<std::size_t>(it - r.image_ids.begin())];
    };
    RankingUserStats& u = users[r.user_id];
    u.user = r.user_id;
    ++u.n_sets;
    const bool first = provenance_of(a->order[0]) == Provenance::kGenerated;
    const bool second = provenance_of(a->order[1]) == Provenance::kGenerated;
    u.first_generated += first;
    u.both_generated += first && second;
  }
  std::vector<RankingUserStats> out;
  for (auto& [_, u] : users) {
    u.pct_first = 100.0 * u.first_generated / u.n_sets;
    u.pct_both = 100.0 * u.both_generated / u.n_sets;
    out.push_back(u);
  }
  return out;
}

SlopeResult progression_slope(std::span<const int> severities) {
  const std::size_t n = severities.size();
  if (n < 2) throw InvalidInput("progression_slope: at least two ratings required");
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int v = severities[i];
    if (v < 1 || v > 4) throw ValidationError("progression_slope: ratings must be in 1..4");
    mean_x += static_cast<double>(i + 1);
    mean_y += v;
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i + 1) - mean_x;
    sxy += dx * (severities[i] - mean_y);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  return {slope, std::atan(slope) * 180.0 / std::numbers::pi};
}

MonotonicityResult summarize_slopes(std::vector<SlopeResult> per_sequence) {
  if (per_sequence.empty()) throw NoData("no progression sequences");
  MonotonicityResult m;
  for (const SlopeResult& s : per_sequence) {
    m.slope += s.slope;
    m.mean_angle_deg += s.angle_deg;
  }
  m.slope /= static_cast<double>(per_sequence.size());
  m.mean_angle_deg /= static_cast<double>(per_sequence.size());
  m.angle_deg = std::atan(m.slope) * 180.0 / std::numbers::pi;
  m.per_sequence = std::move(per_sequence);
  return m;
}

std::vector<ProgressionUserSummary> progression_summary(std::span<const LogRecord> records) {
  std::map<std::string, std::vector<SlopeResult>> slopes;
  std::map<std::string, std::pair<double, int>> plaus;
  for (const LogRecord& r : records) {
    const auto* a = std::get_if<ProgressionAnswer>(&r.answer);
    if (!a) continue;
    slopes[r.user_id].push_back(progression_slope(a->severities));
    plaus[r.user_id].first += a->plausibility;
    ++plaus[r.user_id].second;
  }
  std::vector<ProgressionUserSummary> out;
  for (auto& [user, s] : slopes) {
    ProgressionUserSummary u;
    u.user = user;
    u.n_sequences = static_cast<int>(s.size());
    u.monotonicity = summarize_slopes(std::move(s));
    u.mean_plausibility = plaus[user].first / plaus[user].second;
    out.push_back(std::move(u));
  }
  return out;
}

PlausibilitySummary plausibility_summary(std::span<const LogRecord> records) {
  PlausibilitySummary s;
  std::map<std::string, std::pair<double, int>> sums;
  double total = 0.0;
  for (const LogRecord& r : records) {
    const auto* a = std::get_if<ProgressionAnswer>(&r.answer);
    if (!a) continue;
    if (a->plausibility < 1 || a->plausibility > 5) {
      throw ValidationError("plausibility must be in 1..5");
    }
    sums[r.user_id].first += a->plausibility;
    ++sums[r.user_id].second;
    total += a->plausibility;
    ++s.n;
    const std::string seq = r.truth.sequence.value_or(r.stimulus_id);
    ++s.per_sequence[seq][static_cast<std::size_t>(a->plausibility - 1)];
  }
  if (s.n == 0) throw NoData("no plausibility ratings");
  for (const auto& [user, p] : sums) s.per_user[user] = p.first / p.second;
  s.overall = total / s.n;
  return s;
}

std::vector<double> rolling_mean(std::span<const double> series, int window) {
  if (window < 1) throw InvalidInput("rolling_mean: window must be >= 1");
  if (series.empty()) throw NoData("rolling_mean: empty series");
  std::vector<double> out(series.size());
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t start = i + 1 >= w ? i + 1 - w : 0;
    double sum = 0.0;
    for (std::size_t j = start; j <= i; ++j) sum += series[j];
    out[i] = sum / static_cast<double>(i - start + 1);
  }
  return out;
}

DifficultyByCategory difficulty_by_category(std::span<const LogRecord> records) {
  DifficultyByCategory d;
  for (Category c : {Category::kVascular, Category::kAnatomical, Category::kDebris,
                     Category::kAbnormal}) {
    d.histograms[c] = {};
  }
  for (const LogRecord& r : records) {
    const auto* a = std::get_if<TuringAnswer>(&r.answer);
    if (!a || r.truth.provenance.empty() || r.truth.provenance.front() != Provenance::kGenerated) {
      continue;
    }
    if (!r.truth.category) {
      ++d.excluded;
      continue;
    }
    if (a->difficulty < 1 || a->difficulty > 5) throw ValidationError("difficulty must be in 1..5");
    ++d.histograms[*r.truth.category][static_cast<std::size_t>(a->difficulty - 1)];
    if (a->difficulty == 1) d.outliers.push_back({r.stimulus_id, r.user_id});
  }
  if (d.excluded > 0) {
    spdlog::warn("difficulty_by_category: {} responses on uncategorized generates excluded",
                 d.excluded);
  }
  return d;
}

}  // namespace latentatlas::study
