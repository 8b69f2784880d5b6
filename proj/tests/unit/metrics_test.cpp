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

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "glosa/error.hpp"
#include "glosa/metrics.hpp"

namespace glosa
{
namespace
{

namespace fs = std::filesystem;

std::vector<TelemetryRecord> sampled(double t0, double t1, double dt, const std::function<double(double)>& v,
                                     const std::function<double(double)>& a)
{
  std::vector<TelemetryRecord> out;
  const auto n = static_cast<std::size_t>(std::llround((t1 - t0) / dt));
  for (std::size_t i = 0; i <= n; ++i)
  {
    const double t = t0 + static_cast<double>(i) * dt;
    TelemetryRecord r;
    r.t = t;
    r.vehicle_id = "ego";
    r.v_mps = v(t);
    r.a_mps2 = a(t);
    out.push_back(r);
  }
  return out;
}

const auto zero = [](double) { return 0.0; };

TEST(AverageVelocity, Constant)
{
  const auto tr = sampled(0, 10, 0.05, [](double) { return 2.0; }, zero);
  EXPECT_NEAR(average_velocity(tr), 2.0, 1e-12);
}

TEST(AverageVelocity, HalfSlowHalfFast)
{
  std::vector<TelemetryRecord> tr(4);
  tr[0] = {0.0, "ego", 0, 1.0};
  tr[1] = {1.0, "ego", 0, 1.0};
  tr[2] = {1.0, "ego", 0, 3.0};
  tr[3] = {2.0, "ego", 0, 3.0};
  EXPECT_DOUBLE_EQ(average_velocity(tr), 2.0);
}

TEST(AverageVelocity, StartsAtRelease)
{
  const auto tr = sampled(0, 20, 0.05, [](double t) { return t < 10.0 ? 0.0 : 1.5; }, zero);
  EXPECT_NEAR(average_velocity(tr, 10.0), 1.5, 1e-12);
}

TEST(AverageVelocity, InvariantUnderRefinement)
{
  const auto v = [](double t) { return t < 7.0 ? 0.3 * t : 2.1 - 0.05 * (t - 7.0); };
  const auto coarse = sampled(0, 20, 1.0, v, zero);
  const auto fine = sampled(0, 20, 0.125, v, zero);
  EXPECT_NEAR(average_velocity(coarse), average_velocity(fine), 1e-9);
}

TEST(AverageVelocity, NeedsTwoSamples)
{
  EXPECT_THROW(average_velocity({}), InvalidInput);
  EXPECT_THROW(average_velocity(sampled(0, 0, 1, zero, zero)), InvalidInput);
}

TEST(AccelIntegral, ZeroAcceleration)
{
  EXPECT_DOUBLE_EQ(accel_integral(sampled(0, 100, 0.05, zero, zero), {35, 65}), 0.0);
}

TEST(AccelIntegral, ConstantRectangle)
{
  const auto tr = sampled(0, 100, 0.05, zero, [](double) { return 0.5; });
  EXPECT_NEAR(accel_integral(tr, {35, 65}), 15.0, 1e-9);
}

TEST(AccelIntegral, TriangleRamp)
{
  const auto tr = sampled(35, 65, 0.05, zero, [](double t) { return 1.0 - std::abs(t - 50.0) / 15.0; });
  EXPECT_NEAR(accel_integral(tr, {35, 65}), 15.0, 1e-9);
}

TEST(AccelIntegral, SignChangesWithinSegment)
{
  // a goes from -1 to +1 over one 2 s segment: two triangles of area 0.5 each.
  std::vector<TelemetryRecord> tr(2);
  tr[0] = {0.0, "ego", 0, 0, -1.0};
  tr[1] = {2.0, "ego", 0, 0, 1.0};
  EXPECT_NEAR(accel_integral(tr, {0, 2}), 1.0, 1e-12);
}

TEST(AccelIntegral, AdditiveOverAdjacentWindows)
{
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> a(-2.0, 2.0);
  std::vector<TelemetryRecord> tr;
  for (int i = 0; i <= 2000; ++i)
    tr.push_back({i * 0.05, "ego", 0, 0, a(rng)});
  std::uniform_real_distribution<double> cut(0.0, 100.0);
  for (int i = 0; i < 100; ++i)
  {
    double p[3] = {cut(rng), cut(rng), cut(rng)};
    std::sort(std::begin(p), std::end(p));
    if (p[1] - p[0] < 1e-6 || p[2] - p[1] < 1e-6)
      continue;
    const double whole = accel_integral(tr, {p[0], p[2]});
    EXPECT_NEAR(accel_integral(tr, {p[0], p[1]}) + accel_integral(tr, {p[1], p[2]}), whole, 1e-9);
    EXPECT_GE(whole, 0.0);
  }
}

TEST(AccelIntegral, WindowOutsideTraceIsAnError)
{
  const auto tr = sampled(0, 50, 0.05, zero, zero);
  EXPECT_THROW(accel_integral(tr, {35, 65}), InvalidInput);
  EXPECT_THROW(accel_integral(tr, {20, 10}), InvalidInput);
}

TEST(PercentReduction, Examples)
{
  EXPECT_DOUBLE_EQ(percent_reduction(10, 10), 0.0);
  EXPECT_DOUBLE_EQ(percent_reduction(10, 0), 100.0);
  EXPECT_DOUBLE_EQ(percent_reduction(10, 2.5), 75.0);
  EXPECT_THROW(percent_reduction(0, 1), InvalidInput);
}

TEST(PercentReduction, AntitoneInCandidate)
{
  double prev = percent_reduction(7.0, 0.0);
  for (double c = 0.1; c < 20.0; c += 0.1)
  {
    const double now = percent_reduction(7.0, c);
    EXPECT_LT(now, prev);
    EXPECT_LE(now, 100.0);
    prev = now;
  }
}

TEST(ParseWindow, Forms)
{
  const auto w = parse_window("35:65");
  EXPECT_DOUBLE_EQ(w.t_start, 35);
  EXPECT_DOUBLE_EQ(w.t_end, 65);
  EXPECT_FALSE(w.automatic);
  EXPECT_TRUE(parse_window("auto").automatic);
  EXPECT_THROW(parse_window("65:35"), InvalidInput);
  EXPECT_THROW(parse_window("35-65"), InvalidInput);
  EXPECT_THROW(parse_window("a:b"), InvalidInput);
}

StoredRun stored(ControllerKind k, std::vector<TelemetryRecord> tr, const std::string& fp = "abc")
{
  StoredRun r;
  r.dir = std::string("run_") + std::string(to_string(k));
  r.scenario_id = "s";
  r.label = "25/25";
  r.fingerprint = fp;
  r.designated_vehicle = "ego";
  r.controller = k;
  r.release_t = 0.0;
  r.first_crossing_t = 50.0;
  r.end_t = tr.back().t;
  r.telemetry = std::move(tr);
  return r;
}

std::vector<TelemetryRecord> wobble(double amp)
{
  return sampled(0, 100, 0.05, [](double) { return 2.0; }, [amp](double t) { return amp * std::sin(t); });
}

TEST(CompareRuns, IdenticalRunsReduceNothing)
{
  const auto tr = wobble(1.0);
  const std::vector<StoredRun> runs{stored(ControllerKind::Human, tr), stored(ControllerKind::NonAdaptive, tr),
                                    stored(ControllerKind::Adaptive, tr)};
  const auto rep = compare_runs(runs, {35, 65});
  ASSERT_EQ(rep.configs.size(), 1u);
  EXPECT_DOUBLE_EQ(rep.configs[0].adaptive_vs_human_pct, 0.0);
  EXPECT_DOUBLE_EQ(rep.configs[0].adaptive_vs_non_adaptive_pct, 0.0);
  EXPECT_DOUBLE_EQ(rep.configs[0].non_adaptive_vs_human_pct, 0.0);
}

TEST(CompareRuns, ComputesReductions)
{
  const std::vector<StoredRun> runs{stored(ControllerKind::Human, wobble(1.0)),
                                    stored(ControllerKind::NonAdaptive, wobble(0.5)),
                                    stored(ControllerKind::Adaptive, wobble(0.25))};
  const auto rep = compare_runs(runs, {35, 65});
  EXPECT_NEAR(rep.configs[0].adaptive_vs_human_pct, 75.0, 1e-9);
  EXPECT_NEAR(rep.configs[0].adaptive_vs_non_adaptive_pct, 50.0, 1e-9);
  EXPECT_NEAR(rep.configs[0].average_velocity.at(ControllerKind::Adaptive), 2.0, 1e-12);
}

TEST(CompareRuns, AutoWindowCentersOnCrossing)
{
  const auto tr = wobble(1.0);
  const std::vector<StoredRun> runs{stored(ControllerKind::Human, tr), stored(ControllerKind::NonAdaptive, tr),
                                    stored(ControllerKind::Adaptive, tr)};
  const auto rep = compare_runs(runs, parse_window("auto"));
  EXPECT_DOUBLE_EQ(rep.configs[0].window.t_start, 35.0);
  EXPECT_DOUBLE_EQ(rep.configs[0].window.t_end, 65.0);
}

TEST(CompareRuns, MissingControllerIsNamed)
{
  const std::vector<StoredRun> runs{stored(ControllerKind::Human, wobble(1)),
                                    stored(ControllerKind::NonAdaptive, wobble(1))};
  try
  {
    compare_runs(runs, {35, 65});
    FAIL();
  }
  catch (const InvalidInput& e)
  {
    EXPECT_NE(std::string(e.what()).find("adaptive run"), std::string::npos) << e.what();
  }
}

TEST(CompareRuns, MismatchedScenariosAreRejected)
{
  const std::vector<StoredRun> runs{stored(ControllerKind::Human, wobble(1)),
                                    stored(ControllerKind::NonAdaptive, wobble(1)),
                                    stored(ControllerKind::Adaptive, wobble(1), "other")};
  EXPECT_THROW(compare_runs(runs, {35, 65}), InvalidInput);
}

TEST(WriteReport, IsReproducible)
{
  const std::vector<StoredRun> runs{stored(ControllerKind::Human, wobble(1.0)),
                                    stored(ControllerKind::NonAdaptive, wobble(0.5)),
                                    stored(ControllerKind::Adaptive, wobble(0.25))};
  const auto rep = compare_runs(runs, {35, 65});
  const fs::path a = fs::temp_directory_path() / "glosa_report_a";
  const fs::path b = fs::temp_directory_path() / "glosa_report_b";
  fs::remove_all(a);
  fs::remove_all(b);
  write_report(rep, runs, a);
  write_report(rep, runs, b);
  const auto slurp = [](const fs::path& p) {
    std::ifstream f(p);
    return std::string((std::istreambuf_iterator<char>(f)), {});
  };
  for (const char* name : {"table.csv", "reductions.csv", "run_adaptive/series_ego.csv"})
  {
    ASSERT_TRUE(fs::exists(a / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  EXPECT_EQ(slurp(a / "table.csv"),
            "controller,25/25\nhuman,2.000000\nnon_adaptive,2.000000\nadaptive,2.000000\n");
  fs::remove_all(a);
  fs::remove_all(b);
}

}  // namespace
}  // namespace glosa
