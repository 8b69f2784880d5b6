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

#include <cmath>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "glosa/error.hpp"
#include "glosa/scenario.hpp"
#include "glosa/sim.hpp"

namespace glosa
{
namespace
{

namespace fs = std::filesystem;

ScenarioConfig bundled(const std::string& name, ControllerKind kind)
{
  return load_scenario(fs::path(GLOSA_DATA_DIR) / "scenarios" / (name + ".yaml")).with_controller(kind);
}

std::string csv(const RunResult& r)
{
  std::ostringstream out;
  write_telemetry_csv(out, r.telemetry);
  return out.str();
}

TEST(SimRun, IsDeterministic)
{
  const auto sc = bundled("crosswalk_25_25", ControllerKind::Human);
  const auto a = run(sc);
  const auto b = run(sc);
  EXPECT_FALSE(a.telemetry.empty());
  EXPECT_EQ(csv(a), csv(b));
}

TEST(SimRun, NobodyMovesBeforeFirstGreen)
{
  for (const char* name : {"crosswalk_10_40", "fourway_25_25"})
  {
    const auto sc = bundled(name, ControllerKind::NonAdaptive);
    const auto r = run(sc);
    for (const auto& v : sc.vehicles)
    {
      const auto& sched = sc.light(sc.light_for_course(v.course_id)).schedule;
      for (const auto& row : r.trace(v.id))
      {
        if (sched.snapshot_at(row.t).color == PhaseColor::Green)
          break;
        EXPECT_EQ(row.v_mps, 0.0) << name << ' ' << v.id << " t=" << row.t;
      }
    }
  }
}

TEST(SimRun, TelemetryIsEvenlySpaced)
{
  const auto r = run(bundled("crosswalk_40_10", ControllerKind::Adaptive));
  const auto tr = r.trace("ego");
  for (std::size_t i = 1; i < tr.size(); ++i)
    ASSERT_NEAR(tr[i].t - tr[i - 1].t, 0.05, 1e-9);
}

TEST(SimRun, TerminatesAfterLaps)
{
  for (const char* name : {"crosswalk_40_10", "crosswalk_25_25", "crosswalk_10_40", "fourway_25_25"})
  {
    for (ControllerKind k : {ControllerKind::Adaptive, ControllerKind::NonAdaptive, ControllerKind::Human})
    {
      const auto sc = bundled(name, k);
      const auto r = run(sc);
      const auto& ego = r.vehicle(r.designated_vehicle);
      EXPECT_GE(ego.clearances, static_cast<std::size_t>(sc.laps)) << name << ' ' << to_string(k);
      EXPECT_EQ(r.safety_violations, 0u) << name << ' ' << to_string(k);
      EXPECT_EQ(r.protocol_errors, 0u);
      double longest = 0.0;
      for (const auto& c : sc.courses)
        longest = std::max(longest, c.course.loop_length());
      EXPECT_LT(r.end_t, sc.laps * longest / sc.vehicles[0].controller.v_min);
    }
  }
}

TEST(SimRun, AdaptiveNeverIdlesAfterRelease)
{
  for (const char* name : {"crosswalk_40_10", "crosswalk_25_25", "crosswalk_10_40"})
  {
    const auto r = run(bundled(name, ControllerKind::Adaptive));
    const auto& ego = r.vehicle("ego");
    ASSERT_TRUE(ego.release_t.has_value());
    for (const auto& row : r.trace("ego"))
    {
      if (row.t > *ego.release_t + 0.05 + 1e-9)
        EXPECT_GT(row.v_mps, 0.0) << name << " t=" << row.t;
    }
  }
}

TEST(SimRun, NonAdaptiveIdlesUnderLongRed)
{
  const auto r = run(bundled("crosswalk_10_40", ControllerKind::NonAdaptive));
  const double release = *r.vehicle("ego").release_t;
  std::size_t idle = 0;
  for (const auto& row : r.trace("ego"))
    idle += row.t > release + 0.05 && row.v_mps == 0.0;
  EXPECT_GT(idle, 0u);
}

TEST(SimRun, LoopbackDelayShiftsDecisions)
{
  auto sc = bundled("crosswalk_25_25", ControllerKind::Adaptive);
  sc.transport.delay_s = 0.2;
  const auto r = run(sc);
  std::size_t decisions = 0;
  for (const auto& e : r.events)
  {
    if (e.kind != EventKind::Decision || e.vehicle_id != "ego")
      continue;
    ++decisions;
    const double since_transition = std::fmod(e.t, 25.0);
    EXPECT_NEAR(since_transition, 0.2, 1e-6) << "decision at " << e.t;
  }
  EXPECT_GE(decisions, 2u);
}

TEST(SimRun, DisconnectShowsAfterHeartbeatTimeout)
{
  const auto r = run(bundled("crosswalk_disconnect", ControllerKind::Adaptive));
  std::optional<double> lost;
  std::optional<double> back;
  std::optional<double> target_at_loss;
  for (const auto& row : r.trace("ego"))
  {
    if (!lost && row.t > 1.0 && !row.connected)
    {
      lost = row.t;
      target_at_loss = row.target_mps;
    }
    if (lost && !back)
    {
      if (row.connected)
        back = row.t;
      else
        EXPECT_EQ(row.target_mps, *target_at_loss) << row.t;
    }
  }
  ASSERT_TRUE(lost.has_value());
  EXPECT_NEAR(*lost, 21.55, 1e-9);
  ASSERT_TRUE(back.has_value());
  EXPECT_NEAR(*back, 30.0, 1e-9);
}

TEST(SimRun, ReportsNeverReleasedVehicle)
{
  auto sc = bundled("crosswalk_25_25", ControllerKind::Adaptive);
  sc.max_time_s = 10.0;
  sc.lights[0] = {"crosswalk", PhaseSchedule({{PhaseColor::Red, 1000}, {PhaseColor::Green, 1}})};
  EXPECT_THROW(run(sc), RunError);
}

TEST(RunFiles, RoundTrip)
{
  const auto r = run(bundled("crosswalk_40_10", ControllerKind::Human));
  const fs::path dir = fs::temp_directory_path() / "glosa_run_roundtrip";
  fs::remove_all(dir);
  write_run(r, dir);
  const auto back = read_run(dir);
  EXPECT_EQ(back.scenario_id, r.scenario_id);
  EXPECT_EQ(back.fingerprint, r.fingerprint);
  EXPECT_EQ(back.controller, ControllerKind::Human);
  ASSERT_EQ(back.telemetry.size(), r.telemetry.size());
  std::ostringstream again;
  write_telemetry_csv(again, back.telemetry);
  EXPECT_EQ(again.str(), csv(r));
  fs::remove_all(dir);
}

TEST(TelemetryCsv, RejectsBadHeader)
{
  std::istringstream in("t,x\n1,2\n");
  EXPECT_THROW(read_telemetry_csv(in), LoadError);
}

}  // namespace
}  // namespace glosa
