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

#include <cstddef>
#include <optional>
#include <vector>

namespace glosa
{

inline constexpr double kEarthRadiusM = 6'371'000.0;

/// Latitude/longitude in decimal degrees. Construct through make() to get
/// range checks and longitude normalization into [-180, 180).
struct GeoPoint
{
  double lat = 0.0;
  double lon = 0.0;

  static GeoPoint make(double lat_deg, double lon_deg);

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Great-circle distance in meters (haversine form).
double haversine(const GeoPoint& a, const GeoPoint& b, double radius_m = kEarthRadiusM);

/// Closed loop of waypoints with a marked subset of intersection waypoints.
///
/// Indices are zero-based. Segment i joins waypoint i to waypoint (i + 1) mod n,
/// so a course of n waypoints has n segments and the last one closes the loop.
class WaypointCourse
{
public:
  WaypointCourse(std::vector<GeoPoint> waypoints, std::vector<std::size_t> intersection_indices,
                 double earth_radius_m = kEarthRadiusM);

  std::size_t size() const { return waypoints_.size(); }
  const std::vector<GeoPoint>& waypoints() const { return waypoints_; }
  const GeoPoint& waypoint(std::size_t i) const { return waypoints_.at(i); }
  const std::vector<std::size_t>& intersection_indices() const { return intersections_; }
  bool is_intersection(std::size_t i) const;
  double earth_radius() const { return radius_m_; }

  /// Length of segment i (waypoint i to its successor).
  double segment_length(std::size_t i) const { return segment_m_.at(i); }
  /// Arc distance from waypoint 0 to waypoint i, in [0, loop_length).
  double cumulative_arc(std::size_t i) const { return cumulative_m_.at(i); }
  double loop_length() const { return loop_m_; }

  /// First intersection index strictly after i in loop order (wraps; may return i itself
  /// when i is the only intersection).
  std::size_t next_intersection_after(std::size_t i) const;

private:
  std::vector<GeoPoint> waypoints_;
  std::vector<std::size_t> intersections_;
  double radius_m_;
  std::vector<double> segment_m_;
  std::vector<double> cumulative_m_;
  double loop_m_ = 0.0;
};

/// Index of the waypoint closest to v. Ties go to the lowest index.
std::size_t nearest_waypoint(const WaypointCourse& course, const GeoPoint& v);

/// Sum of segment lengths from waypoint p up to the first intersection strictly after p
/// in loop order. When p is itself an intersection the next one is targeted.
double distance_to_next_intersection(const WaypointCourse& course, std::size_t p);

/// Point at arc distance s (taken modulo the loop length), interpolated linearly in
/// lat/lon between the bracketing waypoints.
GeoPoint position_at_arc(const WaypointCourse& course, double s);

/// Distance from an arbitrary vehicle position to the intersection waypoint it is
/// approaching, along the course.
///
/// Uses the nearest waypoint p and the segment sum from p, then corrects by the
/// along-track offset of v from w_p so the result is continuous between waypoints.
/// A vehicle that has not yet reached an intersection waypoint p targets p itself.
struct IntersectionRange
{
  std::size_t intersection = 0;
  double distance_m = 0.0;
};
IntersectionRange range_to_intersection(const WaypointCourse& course, const GeoPoint& v);

}  // namespace glosa
