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

#include "glosa/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "glosa/error.hpp"
#include "yaml_util.hpp"

namespace glosa
{

std::string_view to_string(ScenarioKind k)
{
  return k == ScenarioKind::Crosswalk ? "crosswalk" : "fourway";
}

ScenarioKind parse_scenario_kind(std::string_view s)
{
  if (s == "crosswalk")
    return ScenarioKind::Crosswalk;
  if (s == "fourway" || s == "four_way" || s == "4way")
    return ScenarioKind::FourWay;
  throw InvalidInput("unknown scenario kind '" + std::string(s) + "'");
}

namespace
{

std::string read_file(const std::filesystem::path& file, const char* what)
{
  std::ifstream in(file);
  if (!in)
    throw LoadError(std::string("cannot open ") + what + " " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<GeoPoint> read_point_list(const std::filesystem::path& file)
{
  const std::string text = read_file(file, "waypoint file");
  YAML::Node root;
  try
  {
    root = YAML::Load(text);
  }
  catch (const YAML::Exception& e)
  {
    throw LoadError(file.string() + ": " + e.what());
  }
  const YAML::Node list = root.IsMap() ? root["waypoints"] : YAML::Node();
  if (!list || !list.IsSequence() || list.size() == 0)
    throw LoadError(file.string() + ": no waypoints");
  std::vector<GeoPoint> out;
  out.reserve(list.size());
  for (const auto& p : list)
  {
    try
    {
      out.push_back(GeoPoint::make(p["lat"].as<double>(), p["lon"].as<double>()));
    }
    catch (const YAML::Exception& e)
    {
      throw LoadError(file.string() + ": bad waypoint entry: " + e.what());
    }
    catch (const InvalidInput& e)
    {
      throw LoadError(file.string() + ": " + e.what());
    }
  }
  return out;
}

ControllerConfig parse_controller(const YAML::Node& node, ControllerConfig base)
{
  if (!node)
    return base;
  base.v_max = node["v_max"].as<double>(base.v_max);
  base.v_min = node["v_min"].as<double>(base.v_min);
  base.a_max = node["a_max"].as<double>(base.a_max);
  base.d_comfort = node["d_comfort"].as<double>(base.d_comfort);
  base.a_comfort = node["a_comfort"].as<double>(base.a_comfort);
  base.intersection_clear_length = node["intersection_clear_length"].as<double>(base.intersection_clear_length);
  base.stop_buffer = node["stop_buffer"].as<double>(base.stop_buffer);
  base.arrival_margin_s = node["arrival_margin_s"].as<double>(base.arrival_margin_s);
  base.reaction_delay_s = node["reaction_delay_s"].as<double>(base.reaction_delay_s);
  base.warning_lead_s = node["warning_lead_s"].as<double>(base.warning_lead_s);
  return base;
}

void fnv1a(std::uint64_t& h, std::string_view s)
{
  for (unsigned char c : s)
  {
    h ^= c;
    h *= 1099511628211ULL;
  }
  h ^= 0xff;
  h *= 1099511628211ULL;
}

std::string fixed(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

}  // namespace

WaypointCourse load_waypoints(const std::filesystem::path& standard_file,
                              const std::filesystem::path& intersections_file, double tolerance_m,
                              double earth_radius_m)
{
  std::vector<GeoPoint> standard = read_point_list(standard_file);
  const std::vector<GeoPoint> marks = read_point_list(intersections_file);

  std::vector<std::size_t> indices;
  for (const auto& m : marks)
  {
    const auto exact = std::find(standard.begin(), standard.end(), m);
    if (exact != standard.end())
    {
      indices.push_back(static_cast<std::size_t>(exact - standard.begin()));
      continue;
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < standard.size(); ++i)
    {
      const double d = haversine(standard[i], m, earth_radius_m);
      if (d < best_d)
      {
        best_d = d;
        best = i;
      }
    }
    if (best_d > tolerance_m)
    {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "intersection (%.8f, %.8f) is %.2f m from the nearest waypoint (limit %.2f m)",
                    m.lat, m.lon, best_d, tolerance_m);
      throw LoadError(buf);
    }
    indices.push_back(best);
  }

  try
  {
    return WaypointCourse(std::move(standard), std::move(indices), earth_radius_m);
  }
  catch (const InvalidInput& e)
  {
    throw LoadError(standard_file.string() + ": " + e.what());
  }
}

void write_waypoints_yaml(const std::filesystem::path& file, const std::vector<GeoPoint>& points)
{
  std::ofstream out(file);
  if (!out)
    throw LoadError("cannot write " + file.string());
  out << "waypoints:\n";
  char buf[96];
  for (const auto& p : points)
  {
    std::snprintf(buf, sizeof(buf), "  - {lat: %.10f, lon: %.10f}\n", p.lat, p.lon);
    out << buf;
  }
}

void ScenarioConfig::validate() const
{
  if (id.empty())
    throw InvalidInput("scenario needs an id");
  if (!(tick_s > 0.0) || !std::isfinite(tick_s))
    throw InvalidInput("tick_s must be positive");
  if (laps < 1)
    throw InvalidInput("laps must be at least 1");
  if (courses.empty() || lights.empty() || vehicles.empty())
    throw InvalidInput("scenario needs courses, lights and vehicles");
  if (transport.delay_s < 0.0 || !std::isfinite(transport.delay_s))
    throw InvalidInput("transport delay must be non-negative");
  if (!(transport.time_scale > 0.0))
    throw InvalidInput("transport time_scale must be positive");
  if (reaction_jitter_s < 0.0)
    throw InvalidInput("reaction_jitter_s must be non-negative");

  std::set<std::string> course_ids;
  for (const auto& c : courses)
  {
    if (!course_ids.insert(c.id).second)
      throw InvalidInput("duplicate course id '" + c.id + "'");
  }
  std::set<std::string> light_ids;
  for (const auto& l : lights)
  {
    if (!light_ids.insert(l.id).second)
      throw InvalidInput("duplicate light id '" + l.id + "'");
  }
  std::set<std::string> bound_courses;
  for (const auto& a : approaches)
  {
    if (!course_ids.contains(a.course_id))
      throw InvalidInput("approach binds unknown course '" + a.course_id + "'");
    if (!light_ids.contains(a.light_id))
      throw InvalidInput("approach on '" + a.course_id + "' binds unknown light '" + a.light_id + "'");
    if (!bound_courses.insert(a.course_id).second)
      throw InvalidInput("course '" + a.course_id + "' is bound to more than one light");
  }

  std::set<std::string> vehicle_ids;
  int designated = 0;
  for (const auto& v : vehicles)
  {
    if (!vehicle_ids.insert(v.id).second)
      throw InvalidInput("duplicate vehicle id '" + v.id + "'");
    if (!course_ids.contains(v.course_id))
      throw InvalidInput("vehicle '" + v.id + "' drives unknown course '" + v.course_id + "'");
    if (!bound_courses.contains(v.course_id))
      throw InvalidInput("vehicle '" + v.id + "' drives course '" + v.course_id + "' that has no light");
    if (v.start_arc_m < 0.0 || !std::isfinite(v.start_arc_m))
      throw InvalidInput("vehicle '" + v.id + "' has a negative start arc");
    v.controller.validate();
    designated += v.designated ? 1 : 0;
  }
  if (designated > 1)
    throw InvalidInput("at most one vehicle may be designated");

  for (const auto& f : faults)
  {
    if (!vehicle_ids.contains(f.vehicle_id))
      throw InvalidInput("fault targets unknown vehicle '" + f.vehicle_id + "'");
    if (!std::isfinite(f.t) || f.t < 0.0)
      throw InvalidInput("fault time must be non-negative");
  }
}

const NamedCourse& ScenarioConfig::course(const std::string& cid) const
{
  for (const auto& c : courses)
  {
    if (c.id == cid)
      return c;
  }
  throw InvalidInput("unknown course '" + cid + "'");
}

const LightDefinition& ScenarioConfig::light(const std::string& lid) const
{
  for (const auto& l : lights)
  {
    if (l.id == lid)
      return l;
  }
  throw InvalidInput("unknown light '" + lid + "'");
}

const std::string& ScenarioConfig::light_for_course(const std::string& course_id) const
{
  for (const auto& a : approaches)
  {
    if (a.course_id == course_id)
      return a.light_id;
  }
  throw InvalidInput("course '" + course_id + "' has no light");
}

const VehicleSpec& ScenarioConfig::designated_vehicle() const
{
  for (const auto& v : vehicles)
  {
    if (v.designated)
      return v;
  }
  if (vehicles.empty())
    throw InvalidInput("scenario has no vehicles");
  return vehicles.front();
}

ScenarioConfig ScenarioConfig::with_controller(ControllerKind k) const
{
  ScenarioConfig copy = *this;
  for (auto& v : copy.vehicles)
    v.controller.kind = k;
  return copy;
}

std::string ScenarioConfig::fingerprint() const
{
  std::uint64_t h = 1469598103934665603ULL;
  fnv1a(h, id);
  fnv1a(h, label);
  fnv1a(h, to_string(kind));
  fnv1a(h, fixed(tick_s));
  fnv1a(h, std::to_string(laps));
  for (const auto& c : courses)
  {
    fnv1a(h, c.id);
    for (const auto& w : c.course.waypoints())
    {
      fnv1a(h, fixed(w.lat));
      fnv1a(h, fixed(w.lon));
    }
    for (auto i : c.course.intersection_indices())
      fnv1a(h, std::to_string(i));
  }
  for (const auto& l : lights)
  {
    fnv1a(h, l.id);
    fnv1a(h, fixed(l.schedule.epoch()));
    for (const auto& p : l.schedule.phases())
    {
      fnv1a(h, to_string(p.color));
      fnv1a(h, fixed(p.duration_s));
    }
  }
  for (const auto& a : approaches)
  {
    fnv1a(h, a.course_id);
    fnv1a(h, a.light_id);
  }
  for (const auto& v : vehicles)
  {
    fnv1a(h, v.id);
    fnv1a(h, v.course_id);
    fnv1a(h, fixed(v.start_arc_m));
  }
  for (const auto& f : faults)
  {
    fnv1a(h, fixed(f.t));
    fnv1a(h, f.vehicle_id);
    fnv1a(h, f.connect ? "connect" : "disconnect");
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScenarioConfig parse_scenario(const std::string& yaml_text, const std::filesystem::path& base_dir)
{
  YAML::Node root;
  try
  {
    root = YAML::Load(yaml_text);
  }
  catch (const YAML::Exception& e)
  {
    throw LoadError(std::string("scenario is not valid YAML: ") + e.what());
  }
  if (!root.IsMap())
    throw LoadError("scenario must be a mapping");

  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  ScenarioConfig cfg;
  try
  {
    cfg.id = root["id"].as<std::string>();
    cfg.label = root["label"].as<std::string>(cfg.id);
    cfg.kind = parse_scenario_kind(root["kind"].as<std::string>("crosswalk"));
    cfg.tick_s = root["tick_s"].as<double>(cfg.tick_s);
    cfg.laps = root["laps"].as<int>(cfg.laps);
    cfg.seed = root["seed"].as<std::uint64_t>(cfg.seed);
    cfg.reaction_jitter_s = root["reaction_jitter_s"].as<double>(cfg.reaction_jitter_s);
    cfg.max_time_s = root["max_time_s"].as<double>(cfg.max_time_s);

    if (const auto rsu = root["rsu"])
    {
      if (rsu["publish_hz"])
        cfg.cadence.publish_period_s = 1.0 / rsu["publish_hz"].as<double>();
      if (rsu["heartbeat_hz"])
        cfg.cadence.heartbeat_period_s = 1.0 / rsu["heartbeat_hz"].as<double>();
      cfg.cadence.heartbeat_timeout_s = rsu["heartbeat_timeout_s"].as<double>(cfg.cadence.heartbeat_timeout_s);
    }
    if (const auto tr = root["transport"])
    {
      const auto mode = tr["mode"].as<std::string>("loopback");
      if (mode == "loopback")
        cfg.transport.mode = TransportMode::Loopback;
      else if (mode == "socket")
        cfg.transport.mode = TransportMode::Socket;
      else
        throw InvalidInput("unknown transport mode '" + mode + "'");
      cfg.transport.delay_s = tr["delay_s"].as<double>(cfg.transport.delay_s);
      cfg.transport.rsu_address = tr["rsu"].as<std::string>(cfg.transport.rsu_address);
      cfg.transport.time_scale = tr["time_scale"].as<double>(cfg.transport.time_scale);
    }

    const auto courses = root["courses"];
    if (!courses || !courses.IsSequence())
      throw InvalidInput("'courses' must be a list");
    const double tolerance = root["intersection_tolerance_m"].as<double>(1.0);
    for (const auto& c : courses)
    {
      cfg.courses.push_back(NamedCourse{
        c["id"].as<std::string>(),
        load_waypoints(resolve(c["waypoints"].as<std::string>()), resolve(c["intersections"].as<std::string>()),
                       tolerance)});
    }

    cfg.lights = parse_light_definitions(root["lights"]);

    for (const auto& a : root["approaches"])
      cfg.approaches.push_back(ApproachBinding{a["course"].as<std::string>(), a["light"].as<std::string>()});

    const ControllerConfig defaults = parse_controller(root["controller_defaults"], ControllerConfig{});
    const auto vehicles = root["vehicles"];
    if (!vehicles || !vehicles.IsSequence())
      throw InvalidInput("'vehicles' must be a list");
    for (const auto& v : vehicles)
    {
      VehicleSpec spec;
      spec.id = v["id"].as<std::string>();
      spec.course_id = v["course"].as<std::string>();
      spec.controller = parse_controller(v["config"], defaults);
      spec.controller.kind = parse_controller_kind(v["controller"].as<std::string>("adaptive"));
      spec.start_arc_m = v["start_arc_m"].as<double>(0.0);
      spec.designated = v["designated"].as<bool>(false);
      cfg.vehicles.push_back(std::move(spec));
    }

    for (const auto& f : root["faults"])
    {
      const auto action = f["action"].as<std::string>();
      if (action != "connect" && action != "disconnect")
        throw InvalidInput("fault action must be connect or disconnect, got '" + action + "'");
      cfg.faults.push_back(FaultEvent{f["t"].as<double>(), f["vehicle"].as<std::string>(), action == "connect"});
    }
    std::stable_sort(cfg.faults.begin(), cfg.faults.end(),
                     [](const FaultEvent& a, const FaultEvent& b) { return a.t < b.t; });

    cfg.validate();
  }
  catch (const YAML::Exception& e)
  {
    throw LoadError(std::string("scenario: ") + e.what());
  }
  catch (const InvalidInput& e)
  {
    throw LoadError(std::string("scenario: ") + e.what());
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& file)
{
  return parse_scenario(read_file(file, "scenario"), file.parent_path());
}

GeoPoint offset_point(const GeoPoint& origin, double east_m, double north_m)
{
  constexpr double deg = 180.0 / std::numbers::pi;
  const double lat = origin.lat + north_m / kEarthRadiusM * deg;
  const double lon = origin.lon + east_m / (kEarthRadiusM * std::cos(origin.lat / deg)) * deg;
  return GeoPoint::make(lat, lon);
}

std::vector<GeoPoint> make_rect_loop(const RectLoopSpec& spec)
{
  if (!(spec.width_m > 0.0) || !(spec.height_m > 0.0) || !(spec.spacing_m > 0.0))
    throw InvalidInput("rectangle dimensions and spacing must be positive");
  // Corners counter-clockwise from south-west.
  const std::array<std::pair<double, double>, 4> corners{{
    {spec.x0, spec.y0},
    {spec.x0 + spec.width_m, spec.y0},
    {spec.x0 + spec.width_m, spec.y0 + spec.height_m},
    {spec.x0, spec.y0 + spec.height_m},
  }};
  const int step = spec.clockwise ? 3 : 1;
  std::vector<GeoPoint> out;
  int c = ((spec.start_corner % 4) + 4) % 4;
  for (int edge = 0; edge < 4; ++edge)
  {
    const int d = (c + step) % 4;
    const auto [ax, ay] = corners[c];
    const auto [bx, by] = corners[d];
    const double len = std::hypot(bx - ax, by - ay);
    const int n = std::max(1, static_cast<int>(std::ceil(len / spec.spacing_m - 1e-9)));
    for (int k = 0; k < n; ++k)
    {
      const double f = static_cast<double>(k) / n;
      out.push_back(offset_point(spec.origin, ax + f * (bx - ax), ay + f * (by - ay)));
    }
    c = d;
  }
  return out;
}

namespace
{

std::size_t nearest_local(const std::vector<GeoPoint>& pts, const GeoPoint& p)
{
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
  {
    const double d = haversine(pts[i], p);
    if (d < best_d)
    {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

std::vector<BundledCourseFiles> write_bundled_courses(const std::filesystem::path& dir)
{
  std::filesystem::create_directories(dir);
  const GeoPoint origin = GeoPoint::make(42.4740, -83.2490);

  struct Layout
  {
    std::string id;
    RectLoopSpec loop;
    std::vector<std::pair<double, double>> marks;  // local meters
  };
  std::vector<Layout> layouts;

  // Crosswalk: a two-lane road around a block. The outer lane runs counter-clockwise,
  // the inner lane clockwise; the crosswalk cuts both lanes on the north side.
  layouts.push_back({"crosswalk_outer", RectLoopSpec{origin, 0.0, 0.0, 42.0, 40.0, 3.0, false, 0}, {{30.0, 40.0}}});
  layouts.push_back({"crosswalk_inner", RectLoopSpec{origin, 3.0, 3.0, 36.0, 34.0, 3.0, true, 0}, {{30.0, 37.0}}});
  // Four-way: two loops that cross twice, each crossing a signalized intersection.
  layouts.push_back(
    {"fourway_a", RectLoopSpec{origin, 0.0, 0.0, 60.0, 42.0, 3.0, false, 0}, {{60.0, 21.0}, {30.0, 42.0}}});
  layouts.push_back(
    {"fourway_b", RectLoopSpec{origin, 30.0, 21.0, 60.0, 42.0, 3.0, false, 1}, {{60.0, 21.0}, {30.0, 42.0}}});

  std::vector<BundledCourseFiles> files;
  for (const auto& l : layouts)
  {
    const auto pts = make_rect_loop(l.loop);
    std::vector<GeoPoint> marks;
    for (const auto& [x, y] : l.marks)
      marks.push_back(pts[nearest_local(pts, offset_point(origin, x, y))]);
    BundledCourseFiles f{l.id, dir / (l.id + "_waypoints.yaml"), dir / (l.id + "_intersections.yaml")};
    write_waypoints_yaml(f.waypoints, pts);
    write_waypoints_yaml(f.intersections, marks);
    files.push_back(std::move(f));
  }
  return files;
}

}  // namespace glosa
