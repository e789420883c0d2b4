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

// Full analysis of a response log: report.json plus CSV tables laid out like
// the study's published tables (per-user detection, ranking, progression).

#include <nlohmann/json.hpp>

#include <filesystem>
#include <span>
#include <string>

#include "latentatlas/study_stats.hpp"
#include "latentatlas/study_types.hpp"

namespace latentatlas::study {

inline constexpr int kRollingWindow = 5;

struct AnalysisOptions {
  bool common_only = true;  // agreement over items every rater saw
  CiMethod ci = CiMethod::kWald;
};

/// Sections without data are null. Deterministic for a given record list.
nlohmann::json analyze(std::span<const LogRecord> records, const AnalysisOptions& options = {});
nlohmann::json analyze(const ResponseLog& log, const AnalysisOptions& options = {});

/// Writes detection.csv, ranking.csv, progression.csv, agreement.csv,
/// difficulty.csv and plausibility_rolling.csv from an `analyze` report.
void write_csv_tables(const nlohmann::json& report, const std::filesystem::path& dir);

}  // namespace latentatlas::study
