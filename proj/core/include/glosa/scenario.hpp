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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glosa/geo.hpp"
#include "glosa/rsu_service.hpp"
#include "glosa/vehicle.hpp"

namespace glosa
{

enum class ScenarioKind
{
  Crosswalk,
  FourWay,
};

std::string_view to_string(ScenarioKind k);
ScenarioKind parse_scenario_kind(std::string_view s);

enum class TransportMode
{
  Loopback,
  Socket,
};

struct TransportSpec
{
  TransportMode mode = TransportMode::Loopback;
  /// Loopback only: fixed delivery delay on the simulation clock.
  double delay_s = 0.0;
  /// Socket only.
  std::string rsu_address = "127.0.0.1:7070";
  double time_scale = 1.0;
};

struct NamedCourse
{
  std::string id;
  WaypointCourse course;
};

/// Every intersection on `course_id` is governed by `light_id`.
struct ApproachBinding
{
  std::string course_id;
  std::string light_id;
};

struct VehicleSpec
{
  std::string id;
  std::string course_id;
  ControllerConfig controller;
  double start_arc_m = 0.0;
  bool designated = false;
};

struct FaultEvent
{
  double t = 0.0;
  std::string vehicle_id;
  bool connect = false;
};

struct ScenarioConfig
{
  std::string id;
  /// Human-readable light configuration, e.g. "25/25"; groups runs in reports.
  std::string label;
  ScenarioKind kind = ScenarioKind::Crosswalk;
  std::vector<NamedCourse> courses;
  std::vector<LightDefinition> lights;
  std::vector<ApproachBinding> approaches;
  std::vector<VehicleSpec> vehicles;
  std::vector<FaultEvent> faults;
  RsuCadence cadence;
  TransportSpec transport;
  double tick_s = 0.05;
  int laps = 2;
  std::uint64_t seed = 0;
  /// Uniform jitter added to each human's reaction delay, drawn from `seed`.
  double reaction_jitter_s = 0.0;
  /// Hard stop for the run; 0 picks laps * loop / v_min plus one light cycle.
  double max_time_s = 0.0;

  /// Binding and range checks. Throws InvalidInput naming the offending entry.
  void validate() const;

  const NamedCourse& course(const std::string& id) const;
  const LightDefinition& light(const std::string& id) const;
  const std::string& light_for_course(const std::string& course_id) const;
  const VehicleSpec& designated_vehicle() const;
  /// Every vehicle switched to one controller kind, other parameters kept.
  ScenarioConfig with_controller(ControllerKind kind) const;
  /// Stable digest of everything except controller kinds; runs of the same scenario
  /// under different controllers share it.
  std::string fingerprint() const;
};

/// Reads a standard-waypoint file and an intersections file, both
/// `waypoints: [{lat, lon}, ...]`. Intersections snap to the matching standard
/// waypoint, or the nearest one within `tolerance_m`.
WaypointCourse load_waypoints(const std::filesystem::path& standard_file,
                              const std::filesystem::path& intersections_file, double tolerance_m = 1.0,
                              double earth_radius_m = kEarthRadiusM);

void write_waypoints_yaml(const std::filesystem::path& file, const std::vector<GeoPoint>& points);

/// Relative paths in the file resolve against its directory.
ScenarioConfig load_scenario(const std::filesystem::path& file);
ScenarioConfig parse_scenario(const std::string& yaml_text, const std::filesystem::path& base_dir);

/// Axis-aligned rectangular loop laid out on a local tangent plane around `origin`.
struct RectLoopSpec
{
  GeoPoint origin;      // local (0, 0)
  double x0 = 0.0;      // meters east of origin
  double y0 = 0.0;      // meters north of origin
  double width_m = 70.0;
  double height_m = 40.0;
  double spacing_m = 3.0;
  bool clockwise = false;
  /// Corner the loop starts from, counted counter-clockwise from south-west (0..3).
  int start_corner = 0;
};

/// Local east/north meters -> lat/lon (equirectangular, fine for a few hundred meters).
GeoPoint offset_point(const GeoPoint& origin, double east_m, double north_m);

std::vector<GeoPoint> make_rect_loop(const RectLoopSpec& spec);

/// Files written by write_bundled_courses(), as (standard, intersections) pairs.
struct BundledCourseFiles
{
  std::string id;
  std::filesystem::path waypoints;
  std::filesystem::path intersections;
};

/// Writes the synthetic crosswalk loops (outer and inner lane) and the two crossing
/// four-way loops into `dir`.
std::vector<BundledCourseFiles> write_bundled_courses(const std::filesystem::path& dir);

}  // namespace glosa
