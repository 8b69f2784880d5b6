/*
 * Copyright (C) 2026 The glosa Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not
 * use this file except in compliance with the License. You may obtain a copy of
 * the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
 * WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
 * License for the specific language governing permissions and limitations under
 * the License.
 */

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "glosa/sim.hpp"

namespace glosa
{

struct WindowSpec
{
  double t_start = 35.0;
  double t_end = 65.0;
  /// Center a window of the same width on the human run's first crossing instead.
  bool automatic = false;

  void validate() const;
};

/// "35:65" or "auto" (30 s, centered on the first crossing).
WindowSpec parse_window(const std::string& text);

/// Time-weighted mean speed over samples with t >= from (trapezoid rule).
/// Needs at least two samples in range.
double average_velocity(const std::vector<TelemetryRecord>& trace, double from = -1e300);

/// Integral of |a| dt over the window, with a taken as piecewise linear between samples
/// and window endpoints interpolated. Throws when the window leaves the trace.
double accel_integral(const std::vector<TelemetryRecord>& trace, const WindowSpec& window);

/// (baseline - candidate) / baseline * 100. Throws when baseline is 0.
double percent_reduction(double baseline_integral, double candidate_integral);

struct ConfigComparison
{
  std::string label;
  std::string scenario_id;
  WindowSpec window;
  std::map<ControllerKind, double> average_velocity;
  std::map<ControllerKind, double> accel_integral;
  double adaptive_vs_human_pct = 0.0;
  double adaptive_vs_non_adaptive_pct = 0.0;
  double non_adaptive_vs_human_pct = 0.0;
};

struct ComparisonReport
{
  std::vector<ConfigComparison> configs;
};

/// Groups runs by label; every group needs one run per controller kind, all with the
/// same scenario fingerprint.
ComparisonReport compare_runs(const std::vector<StoredRun>& runs, const WindowSpec& window);

/// Every directory under `dir` (or `dir` itself) holding a run.json, sorted by path.
std::vector<StoredRun> read_runs(const std::filesystem::path& dir);

/// Writes table.csv, reductions.csv and per-run series files under `out`.
void write_report(const ComparisonReport& report, const std::vector<StoredRun>& runs,
                  const std::filesystem::path& out);

}  // namespace glosa
