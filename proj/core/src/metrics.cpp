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

#include "glosa/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "glosa/error.hpp"

namespace glosa
{

namespace
{

constexpr double kTol = 1e-9;
constexpr std::array<ControllerKind, 3> kOrder{ControllerKind::Human, ControllerKind::NonAdaptive,
                                               ControllerKind::Adaptive};

std::string fmt6(double v)
{
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

/// Integral of |f| where f is linear from (0, a) to (h, b).
double abs_linear_area(double a, double b, double h)
{
  if ((a >= 0.0) == (b >= 0.0))
    return 0.5 * std::abs(a + b) * h;
  const double root = h * a / (a - b);
  return 0.5 * (std::abs(a) * root + std::abs(b) * (h - root));
}

double accel_at(const std::vector<TelemetryRecord>& tr, std::size_t i, double t)
{
  const auto& p = tr[i];
  const auto& q = tr[i + 1];
  const double span = q.t - p.t;
  if (span <= 0.0)
    return p.a_mps2;
  return p.a_mps2 + (q.a_mps2 - p.a_mps2) * (t - p.t) / span;
}

}  // namespace

void WindowSpec::validate() const
{
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_start < t_end))
    throw InvalidInput("window start must be before its end");
}

WindowSpec parse_window(const std::string& text)
{
  WindowSpec w;
  if (text == "auto")
  {
    w.automatic = true;
    w.t_start = 0.0;
    w.t_end = 30.0;
    return w;
  }
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw InvalidInput("window must be 'start:end' or 'auto', got '" + text + "'");
  try
  {
    std::size_t a = 0;
    std::size_t b = 0;
    const std::string lhs = text.substr(0, colon);
    const std::string rhs = text.substr(colon + 1);
    w.t_start = std::stod(lhs, &a);
    w.t_end = std::stod(rhs, &b);
    if (a != lhs.size() || b != rhs.size())
      throw std::invalid_argument(text);
  }
  catch (const std::exception&)
  {
    throw InvalidInput("window must be 'start:end' or 'auto', got '" + text + "'");
  }
  w.validate();
  return w;
}

double average_velocity(const std::vector<TelemetryRecord>& trace, double from)
{
  double area = 0.0;
  double first = 0.0;
  double last = 0.0;
  std::size_t used = 0;
  const TelemetryRecord* prev = nullptr;
  for (const auto& r : trace)
  {
    if (r.t < from - kTol)
      continue;
    if (prev != nullptr)
      area += 0.5 * (prev->v_mps + r.v_mps) * (r.t - prev->t);
    else
      first = r.t;
    last = r.t;
    prev = &r;
    ++used;
  }
  if (used < 2 || !(last > first))
    throw InvalidInput("average velocity needs at least two samples after release");
  return area / (last - first);
}

double accel_integral(const std::vector<TelemetryRecord>& trace, const WindowSpec& window)
{
  window.validate();
  if (trace.size() < 2)
    throw InvalidInput("acceleration integral needs at least two samples");
  if (window.t_start < trace.front().t - kTol || window.t_end > trace.back().t + kTol)
  {
    throw InvalidInput("window [" + fmt6(window.t_start) + ", " + fmt6(window.t_end) + "] lies outside the trace [" +
                       fmt6(trace.front().t) + ", " + fmt6(trace.back().t) + "]");
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < trace.size(); ++i)
  {
    const double lo = std::max(trace[i].t, window.t_start);
    const double hi = std::min(trace[i + 1].t, window.t_end);
    if (hi <= lo)
      continue;
    total += abs_linear_area(accel_at(trace, i, lo), accel_at(trace, i, hi), hi - lo);
  }
  return total;
}

double percent_reduction(double baseline_integral, double candidate_integral)
{
  if (baseline_integral == 0.0)
    throw InvalidInput("percent reduction is undefined for a zero baseline");
  return (baseline_integral - candidate_integral) / baseline_integral * 100.0;
}

namespace
{

std::vector<TelemetryRecord> designated_trace(const StoredRun& r)
{
  std::vector<TelemetryRecord> out;
  for (const auto& row : r.telemetry)
  {
    if (row.vehicle_id == r.designated_vehicle)
      out.push_back(row);
  }
  return out;
}

WindowSpec resolve_window(const WindowSpec& w, const StoredRun& human,
                          const std::vector<std::vector<TelemetryRecord>>& traces)
{
  if (!w.automatic)
    return w;
  if (!human.first_crossing_t)
    throw InvalidInput("the human run for '" + human.label + "' never reached its intersection");
  const double width = w.t_end - w.t_start;
  double lo = *human.first_crossing_t - width / 2.0;
  double hi = lo + width;
  double t_min = -1e300;
  double t_max = 1e300;
  for (const auto& tr : traces)
  {
    t_min = std::max(t_min, tr.front().t);
    t_max = std::min(t_max, tr.back().t);
  }
  if (lo < t_min)
  {
    hi += t_min - lo;
    lo = t_min;
  }
  if (hi > t_max)
  {
    lo -= hi - t_max;
    hi = t_max;
  }
  WindowSpec out{lo, hi, false};
  out.validate();
  if (lo < t_min - kTol)
    throw InvalidInput("runs for '" + human.label + "' are shorter than the window");
  return out;
}

}  // namespace

ComparisonReport compare_runs(const std::vector<StoredRun>& runs, const WindowSpec& window)
{
  if (!window.automatic)
    window.validate();
  std::vector<std::string> labels;
  std::map<std::string, std::map<ControllerKind, const StoredRun*>> groups;
  for (const auto& r : runs)
  {
    if (!groups.contains(r.label))
      labels.push_back(r.label);
    auto& slot = groups[r.label][r.controller];
    if (slot != nullptr)
      throw InvalidInput("two " + std::string(to_string(r.controller)) + " runs for '" + r.label + "'");
    slot = &r;
  }
  if (labels.empty())
    throw InvalidInput("no runs to compare");

  ComparisonReport report;
  for (const auto& label : labels)
  {
    const auto& g = groups[label];
    for (ControllerKind k : kOrder)
    {
      if (!g.contains(k))
        throw InvalidInput("configuration '" + label + "' has no " + std::string(to_string(k)) + " run");
    }
    const StoredRun& human = *g.at(ControllerKind::Human);
    for (ControllerKind k : kOrder)
    {
      const StoredRun& r = *g.at(k);
      if (r.fingerprint != human.fingerprint)
        throw InvalidInput("runs for '" + label + "' come from different scenarios (" + human.scenario_id + " vs " +
                           r.scenario_id + ")");
    }

    std::vector<std::vector<TelemetryRecord>> traces;
    for (ControllerKind k : kOrder)
    {
      traces.push_back(designated_trace(*g.at(k)));
      if (traces.back().size() < 2)
        throw InvalidInput("the " + std::string(to_string(k)) + " run for '" + label + "' has an empty trace");
    }

    ConfigComparison c;
    c.label = label;
    c.scenario_id = human.scenario_id;
    c.window = resolve_window(window, human, traces);
    for (std::size_t i = 0; i < kOrder.size(); ++i)
    {
      const StoredRun& r = *g.at(kOrder[i]);
      c.average_velocity[kOrder[i]] = average_velocity(traces[i], r.release_t.value_or(-1e300));
      c.accel_integral[kOrder[i]] = accel_integral(traces[i], c.window);
    }
    const double h = c.accel_integral[ControllerKind::Human];
    const double n = c.accel_integral[ControllerKind::NonAdaptive];
    const double a = c.accel_integral[ControllerKind::Adaptive];
    c.adaptive_vs_human_pct = percent_reduction(h, a);
    c.non_adaptive_vs_human_pct = percent_reduction(h, n);
    c.adaptive_vs_non_adaptive_pct = n > 0.0 ? percent_reduction(n, a) : 0.0;
    report.configs.push_back(std::move(c));
  }
  return report;
}

std::vector<StoredRun> read_runs(const std::filesystem::path& dir)
{
  if (!std::filesystem::is_directory(dir))
    throw LoadError("runs directory " + dir.string() + " does not exist");
  std::vector<std::filesystem::path> found;
  if (std::filesystem::exists(dir / "run.json"))
    found.push_back(dir);
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
  {
    if (e.is_directory() && std::filesystem::exists(e.path() / "run.json"))
      found.push_back(e.path());
  }
  std::sort(found.begin(), found.end());
  std::vector<StoredRun> runs;
  for (const auto& p : found)
    runs.push_back(read_run(p));
  return runs;
}

void write_report(const ComparisonReport& report, const std::vector<StoredRun>& runs, const std::filesystem::path& out)
{
  std::filesystem::create_directories(out);
  {
    std::ofstream f(out / "table.csv", std::ios::binary);
    f << "controller";
    for (const auto& c : report.configs)
      f << ',' << c.label;
    f << '\n';
    for (ControllerKind k : kOrder)
    {
      f << to_string(k);
      for (const auto& c : report.configs)
        f << ',' << fmt6(c.average_velocity.at(k));
      f << '\n';
    }
  }
  {
    std::ofstream f(out / "reductions.csv", std::ios::binary);
    f << "config,scenario_id,window_start_s,window_end_s,human_integral,non_adaptive_integral,adaptive_integral,"
         "adaptive_vs_human_pct,non_adaptive_vs_human_pct,adaptive_vs_non_adaptive_pct\n";
    for (const auto& c : report.configs)
    {
      f << c.label << ',' << c.scenario_id << ',' << fmt6(c.window.t_start) << ',' << fmt6(c.window.t_end) << ','
        << fmt6(c.accel_integral.at(ControllerKind::Human)) << ','
        << fmt6(c.accel_integral.at(ControllerKind::NonAdaptive)) << ','
        << fmt6(c.accel_integral.at(ControllerKind::Adaptive)) << ',' << fmt6(c.adaptive_vs_human_pct) << ','
        << fmt6(c.non_adaptive_vs_human_pct) << ',' << fmt6(c.adaptive_vs_non_adaptive_pct) << '\n';
    }
  }
  for (const auto& r : runs)
  {
    const std::filesystem::path dir = out / r.dir.filename();
    std::filesystem::create_directories(dir);
    std::set<std::string> vehicles;
    for (const auto& row : r.telemetry)
      vehicles.insert(row.vehicle_id);
    for (const auto& v : vehicles)
    {
      std::ofstream f(dir / ("series_" + v + ".csv"), std::ios::binary);
      f << "t,v_mps,a_mps2\n";
      for (const auto& row : r.telemetry)
      {
        if (row.vehicle_id == v)
          f << fmt6(row.t) << ',' << fmt6(row.v_mps) << ',' << fmt6(row.a_mps2) << '\n';
      }
    }
  }
}

}  // namespace glosa
