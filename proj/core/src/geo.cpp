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

#include "glosa/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "glosa/error.hpp"

namespace glosa
{
namespace
{

constexpr double kDegToRad = std::numbers::pi / 180.0;

void require_finite(const GeoPoint& p)
{
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon))
    throw InvalidInput("non-finite coordinate");
}

}  // namespace

GeoPoint GeoPoint::make(double lat_deg, double lon_deg)
{
  if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg))
    throw InvalidInput("non-finite coordinate");
  if (lat_deg < -90.0 || lat_deg > 90.0)
    throw InvalidInput("latitude out of range: " + std::to_string(lat_deg));
  double lon = std::fmod(lon_deg + 180.0, 360.0);
  if (lon < 0.0)
    lon += 360.0;
  return GeoPoint{lat_deg, lon - 180.0};
}

double haversine(const GeoPoint& a, const GeoPoint& b, double radius_m)
{
  require_finite(a);
  require_finite(b);
  if (!(radius_m > 0.0) || !std::isfinite(radius_m))
    throw InvalidInput("earth radius must be positive");

  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double half_dphi = (b.lat - a.lat) * kDegToRad / 2.0;
  const double half_dlambda = (b.lon - a.lon) * kDegToRad / 2.0;

  const double s_phi = std::sin(half_dphi);
  const double s_lambda = std::sin(half_dlambda);
  double h = s_phi * s_phi + std::cos(phi1) * std::cos(phi2) * s_lambda * s_lambda;
  // Rounding can push h a hair past 1 for antipodes.
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * radius_m * std::asin(std::sqrt(h));
}

WaypointCourse::WaypointCourse(std::vector<GeoPoint> waypoints, std::vector<std::size_t> intersection_indices,
                               double earth_radius_m)
  : waypoints_(std::move(waypoints)), intersections_(std::move(intersection_indices)), radius_m_(earth_radius_m)
{
  if (waypoints_.size() < 2)
    throw InvalidInput("course needs at least 2 waypoints");
  if (intersections_.empty())
    throw InvalidInput("course needs at least 1 intersection");
  if (!(radius_m_ > 0.0) || !std::isfinite(radius_m_))
    throw InvalidInput("earth radius must be positive");
  for (const auto& w : waypoints_)
    require_finite(w);

  std::sort(intersections_.begin(), intersections_.end());
  intersections_.erase(std::unique(intersections_.begin(), intersections_.end()), intersections_.end());
  if (intersections_.back() >= waypoints_.size())
    throw InvalidInput("intersection index " + std::to_string(intersections_.back()) + " out of range");

  const std::size_t n = waypoints_.size();
  segment_m_.resize(n);
  cumulative_m_.resize(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
  {
    cumulative_m_[i] = acc;
    segment_m_[i] = haversine(waypoints_[i], waypoints_[(i + 1) % n], radius_m_);
    if (segment_m_[i] <= 0.0)
      throw InvalidInput("duplicate adjacent waypoints at index " + std::to_string(i));
    acc += segment_m_[i];
  }
  loop_m_ = acc;
  if (!(loop_m_ > 0.0))
    throw InvalidInput("all waypoints coincide");
}

bool WaypointCourse::is_intersection(std::size_t i) const
{
  return std::binary_search(intersections_.begin(), intersections_.end(), i);
}

std::size_t WaypointCourse::next_intersection_after(std::size_t i) const
{
  auto it = std::upper_bound(intersections_.begin(), intersections_.end(), i);
  return it == intersections_.end() ? intersections_.front() : *it;
}

std::size_t nearest_waypoint(const WaypointCourse& course, const GeoPoint& v)
{
  require_finite(v);
  const auto& w = course.waypoints();
  if (w.empty())
    throw InvalidInput("empty course");
  std::size_t best = 0;
  double best_d = haversine(w[0], v, course.earth_radius());
  for (std::size_t i = 1; i < w.size(); ++i)
  {
    const double d = haversine(w[i], v, course.earth_radius());
    if (d < best_d)
    {
      best_d = d;
      best = i;
    }
  }
  return best;
}

double distance_to_next_intersection(const WaypointCourse& course, std::size_t p)
{
  const std::size_t n = course.size();
  if (p >= n)
    throw InvalidInput("waypoint index " + std::to_string(p) + " out of range");
  const std::size_t k = course.next_intersection_after(p);
  double sum = 0.0;
  std::size_t i = p;
  do
  {
    sum += course.segment_length(i);
    i = (i + 1) % n;
  } while (i != k);
  return sum;
}

GeoPoint position_at_arc(const WaypointCourse& course, double s)
{
  if (!std::isfinite(s) || s < 0.0)
    throw InvalidInput("arc position must be finite and non-negative");
  const double loop = course.loop_length();
  s = std::fmod(s, loop);

  const std::size_t n = course.size();
  // Last waypoint whose cumulative arc is <= s.
  std::size_t lo = 0;
  std::size_t hi = n;
  while (hi - lo > 1)
  {
    const std::size_t mid = (lo + hi) / 2;
    if (course.cumulative_arc(mid) <= s)
      lo = mid;
    else
      hi = mid;
  }
  const double seg = course.segment_length(lo);
  const double frac = seg > 0.0 ? std::clamp((s - course.cumulative_arc(lo)) / seg, 0.0, 1.0) : 0.0;
  if (frac == 0.0)
    return course.waypoint(lo);

  const GeoPoint& a = course.waypoint(lo);
  const GeoPoint& b = course.waypoint((lo + 1) % n);
  double dlon = b.lon - a.lon;
  if (dlon > 180.0)
    dlon -= 360.0;
  else if (dlon < -180.0)
    dlon += 360.0;
  return GeoPoint::make(a.lat + frac * (b.lat - a.lat), a.lon + frac * dlon);
}

IntersectionRange range_to_intersection(const WaypointCourse& course, const GeoPoint& v)
{
  const std::size_t n = course.size();
  const double r = course.earth_radius();
  const std::size_t p = nearest_waypoint(course, v);
  const GeoPoint& wp = course.waypoint(p);
  const double d_p = haversine(wp, v, r);

  // Along-track position of v on the segment leaving w_p (positive means v is past w_p).
  const double seg_next = course.segment_length(p);
  double ahead = 0.0;
  if (seg_next > 0.0)
  {
    const double d_next = haversine(v, course.waypoint((p + 1) % n), r);
    ahead = (d_p * d_p - d_next * d_next + seg_next * seg_next) / (2.0 * seg_next);
  }

  if (ahead > 0.0)
  {
    return {course.next_intersection_after(p), distance_to_next_intersection(course, p) - ahead};
  }

  // v sits on the segment arriving at w_p.
  const std::size_t prev = (p + n - 1) % n;
  const double seg_prev = course.segment_length(prev);
  double behind = 0.0;
  if (seg_prev > 0.0)
  {
    const double d_prev = haversine(course.waypoint(prev), v, r);
    const double along_prev = (d_prev * d_prev - d_p * d_p + seg_prev * seg_prev) / (2.0 * seg_prev);
    behind = std::max(0.0, seg_prev - along_prev);
  }
  if (behind > 0.0 && course.is_intersection(p))
    return {p, behind};
  return {course.next_intersection_after(p), distance_to_next_intersection(course, p) + behind};
}

}  // namespace glosa
