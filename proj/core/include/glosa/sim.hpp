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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "glosa/scenario.hpp"
#include "glosa/vehicle.hpp"

namespace glosa
{

/// One row per vehicle per tick.
struct TelemetryRecord
{
  double t = 0.0;
  std::string vehicle_id;
  double arc_m = 0.0;
  double v_mps = 0.0;
  double a_mps2 = 0.0;
  PhaseColor light = PhaseColor::Red;
  bool connected = false;
  double target_mps = 0.0;
};

enum class EventKind
{
  Released,
  Decision,
  Arrival,  // crossed a stop line (entered an intersection zone)
  Cleared,  // left an intersection zone
  LostConnection,
  RegainedConnection,
  FaultDisconnect,
  FaultConnect,
  StaleMessage,
  Finished,
};

std::string_view to_string(EventKind k);

struct RunEvent
{
  double t = 0.0;
  std::string vehicle_id;
  EventKind kind = EventKind::Released;
  std::optional<Decision> decision;
  /// Intersection waypoint index for arrivals.
  std::size_t intersection = 0;
  double command = 0.0;
};

struct VehicleSummary
{
  std::string id;
  ControllerKind kind = ControllerKind::Adaptive;
  std::string course_id;
  std::string light_id;
  double loop_length_m = 0.0;
  /// Intersection zones as [begin, end) arc intervals; an interval may wrap (begin > end).
  std::vector<std::pair<double, double>> zones;
  std::optional<double> release_t;
  std::optional<double> first_crossing_t;
  std::size_t crossings = 0;
  std::size_t clearances = 0;
};

struct RunResult
{
  std::string scenario_id;
  std::string label;
  std::string fingerprint;
  std::string designated_vehicle;
  ControllerKind designated_kind = ControllerKind::Adaptive;
  double tick_s = 0.05;
  double end_t = 0.0;
  std::vector<TelemetryRecord> telemetry;
  std::vector<RunEvent> events;
  std::vector<VehicleSummary> vehicles;
  std::size_t safety_violations = 0;
  std::size_t protocol_errors = 0;

  const VehicleSummary& vehicle(const std::string& id) const;
  std::vector<TelemetryRecord> trace(const std::string& vehicle_id) const;
};

/// Whether arc position s lies in any of the summary's zones.
bool in_zone(const VehicleSummary& v, double arc_m);

/// Telemetry rows where a vehicle sits inside its intersection zone while its light is red.
std::vector<TelemetryRecord> safety_violations(const RunResult& r);

struct RunOptions
{
  /// Socket transport only: give up if the service does not answer within this long.
  double connect_timeout_s = 5.0;
};

/// Steps the scenario on the simulation clock until the designated vehicle has cleared
/// its first intersection `laps` times. Loopback transport is fully deterministic.
RunResult run(const ScenarioConfig& config, const RunOptions& options = {});

void write_telemetry_csv(std::ostream& out, const std::vector<TelemetryRecord>& rows);
std::vector<TelemetryRecord> read_telemetry_csv(std::istream& in);
void write_events_csv(std::ostream& out, const std::vector<RunEvent>& events);

/// Writes telemetry.csv, events.csv and run.json into `dir` (created if missing).
void write_run(const RunResult& r, const std::filesystem::path& dir);

/// Run metadata plus telemetry, as read back from a run directory.
struct StoredRun
{
  std::filesystem::path dir;
  std::string scenario_id;
  std::string label;
  std::string fingerprint;
  std::string designated_vehicle;
  ControllerKind controller = ControllerKind::Adaptive;
  double tick_s = 0.05;
  double end_t = 0.0;
  std::optional<double> release_t;
  std::optional<double> first_crossing_t;
  std::vector<TelemetryRecord> telemetry;
};

StoredRun read_run(const std::filesystem::path& dir);

}  // namespace glosa
