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

#include <random>

#include <benchmark/benchmark.h>

#include "glosa/geo.hpp"
#include "glosa/rsu_protocol.hpp"
#include "glosa/scenario.hpp"
#include "glosa/signal_phase.hpp"
#include "glosa/sim.hpp"

namespace
{

using namespace glosa;

void BM_Haversine(benchmark::State& state)
{
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lat(-80, 80);
  std::uniform_real_distribution<double> lon(-180, 180);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 1024; ++i)
    pts.push_back(GeoPoint::make(lat(rng), lon(rng)));
  std::size_t i = 0;
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(haversine(pts[i & 1023], pts[(i + 1) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_Haversine);

void BM_NearestWaypoint(benchmark::State& state)
{
  RectLoopSpec spec;
  spec.origin = GeoPoint::make(42.474, -83.249);
  const WaypointCourse course(make_rect_loop(spec), {0});
  const GeoPoint probe = position_at_arc(course, course.loop_length() * 0.37);
  for (auto _ : state)
    benchmark::DoNotOptimize(nearest_waypoint(course, probe));
}
BENCHMARK(BM_NearestWaypoint);

void BM_SnapshotAt(benchmark::State& state)
{
  const PhaseSchedule sched({{PhaseColor::Green, 25}, {PhaseColor::Red, 25}});
  double t = 0.0;
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(sched.snapshot_at(t));
    t += 0.05;
  }
}
BENCHMARK(BM_SnapshotAt);

void BM_EncodeMessage(benchmark::State& state)
{
  const auto m = RsuMessage::time_left("crosswalk", 12.35, 4711, 1234.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(encode_message(m));
}
BENCHMARK(BM_EncodeMessage);

void BM_DecodeMessage(benchmark::State& state)
{
  const std::string line = encode_message(RsuMessage::time_left("crosswalk", 12.35, 4711, 1234.5));
  for (auto _ : state)
    benchmark::DoNotOptimize(decode_message(line));
}
BENCHMARK(BM_DecodeMessage);

void BM_SimRun(benchmark::State& state)
{
  const auto sc = load_scenario(std::string(GLOSA_DATA_DIR) + "/scenarios/crosswalk_25_25.yaml")
                    .with_controller(ControllerKind::Adaptive);
  for (auto _ : state)
    benchmark::DoNotOptimize(run(sc).telemetry.size());
}
BENCHMARK(BM_SimRun)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
