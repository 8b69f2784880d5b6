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

#include <gtest/gtest.h>

#include "glosa/error.hpp"
#include "glosa/scenario.hpp"
#include "test_support.hpp"

namespace glosa
{
namespace
{

namespace fs = std::filesystem;

class WaypointFiles : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() / ("glosa_wp_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    points_ = testing::ring(20, 10.0);
    write_waypoints_yaml(dir_ / "wp.yaml", points_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path intersections(const std::vector<GeoPoint>& pts)
  {
    write_waypoints_yaml(dir_ / "ix.yaml", pts);
    return dir_ / "ix.yaml";
  }

  /// w6 pushed `meters` radially outward from the ring center.
  GeoPoint pushed_out(double meters) const
  {
    const GeoPoint c = GeoPoint::make(10.0, 20.0);
    const GeoPoint w = points_[6];
    const double k = meters / 10.0;
    return GeoPoint::make(w.lat + (w.lat - c.lat) * k, w.lon + (w.lon - c.lon) * k);
  }

  fs::path dir_;
  std::vector<GeoPoint> points_;
};

TEST_F(WaypointFiles, ExactMatch)
{
  const auto course = load_waypoints(dir_ / "wp.yaml", intersections({points_[6]}));
  EXPECT_EQ(course.size(), 20u);
  EXPECT_EQ(course.intersection_indices(), std::vector<std::size_t>{6});
}

TEST_F(WaypointFiles, SnapsWithinTolerance)
{
  const GeoPoint near = pushed_out(0.4);
  EXPECT_NEAR(haversine(near, points_[6]), 0.4, 1e-3);
  const auto course = load_waypoints(dir_ / "wp.yaml", intersections({near}));
  EXPECT_EQ(course.intersection_indices(), std::vector<std::size_t>{6});
}

TEST_F(WaypointFiles, FarIntersectionIsAnError)
{
  const auto ix = intersections({pushed_out(5.0)});
  try
  {
    load_waypoints(dir_ / "wp.yaml", ix);
    FAIL() << "expected LoadError";
  }
  catch (const LoadError& e)
  {
    EXPECT_NE(std::string(e.what()).find("5.0"), std::string::npos) << e.what();
  }
}

TEST_F(WaypointFiles, EmptyFileIsAnError)
{
  std::ofstream(dir_ / "empty.yaml").close();
  EXPECT_THROW(load_waypoints(dir_ / "empty.yaml", intersections({points_[6]})), LoadError);
  EXPECT_THROW(load_waypoints(dir_ / "wp.yaml", dir_ / "missing.yaml"), LoadError);
}

TEST_F(WaypointFiles, WriteReadRoundTrip)
{
  const auto course = load_waypoints(dir_ / "wp.yaml", intersections({points_[0], points_[10]}));
  ASSERT_EQ(course.size(), points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i)
    EXPECT_LT(haversine(course.waypoint(i), points_[i]), 1e-4);
  EXPECT_EQ(course.intersection_indices(), (std::vector<std::size_t>{0, 10}));
}

TEST(RectLoop, GeometryMatchesSpec)
{
  RectLoopSpec spec;
  spec.origin = GeoPoint::make(42.0, -83.0);
  spec.width_m = 42;
  spec.height_m = 40;
  const auto pts = make_rect_loop(spec);
  double perimeter = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
  {
    const double seg = haversine(pts[i], pts[(i + 1) % pts.size()]);
    EXPECT_LE(seg, 3.0 + 1e-3);
    perimeter += seg;
  }
  EXPECT_NEAR(perimeter, 164.0, 0.1);
}

const char* kScenario = R"(
id: tiny
label: "5/5"
kind: crosswalk
courses:
  - id: loop
    waypoints: wp.yaml
    intersections: ix.yaml
lights:
  - id: L
    phases:
      - {color: green, duration_s: 5}
      - {color: red, duration_s: 5}
approaches:
  - {course: loop, light: L}
vehicles:
  - {id: a, course: loop, controller: adaptive, designated: true}
)";

class ScenarioFiles : public WaypointFiles
{
protected:
  void SetUp() override
  {
    WaypointFiles::SetUp();
    intersections({points_[6]});
  }
};

TEST_F(ScenarioFiles, ParsesMinimalScenario)
{
  const auto sc = parse_scenario(kScenario, dir_);
  EXPECT_EQ(sc.id, "tiny");
  EXPECT_EQ(sc.label, "5/5");
  EXPECT_EQ(sc.designated_vehicle().id, "a");
  EXPECT_EQ(sc.light_for_course("loop"), "L");
  EXPECT_DOUBLE_EQ(sc.tick_s, 0.05);
  EXPECT_EQ(sc.laps, 2);
}

TEST_F(ScenarioFiles, RejectsBadBindings)
{
  std::string text = kScenario;
  text.replace(text.find("{course: loop, light: L}"), 24, "{course: loop, light: Q}");
  EXPECT_THROW(parse_scenario(text, dir_), LoadError);

  text = kScenario;
  text.replace(text.find("course: loop, controller"), 12, "course: nope");
  EXPECT_THROW(parse_scenario(text, dir_), LoadError);
}

TEST_F(ScenarioFiles, FingerprintIgnoresControllerOnly)
{
  const auto sc = parse_scenario(kScenario, dir_);
  EXPECT_EQ(sc.fingerprint(), sc.with_controller(ControllerKind::Human).fingerprint());
  auto other = sc;
  other.lights[0] = {"L", PhaseSchedule({{PhaseColor::Green, 6}, {PhaseColor::Red, 5}})};
  EXPECT_NE(sc.fingerprint(), other.fingerprint());
}

TEST(BundledScenarios, AllLoadAndValidate)
{
  for (const auto& e : fs::directory_iterator(fs::path(GLOSA_DATA_DIR) / "scenarios"))
  {
    SCOPED_TRACE(e.path().string());
    const auto sc = load_scenario(e.path());
    EXPECT_NO_THROW(sc.validate());
    EXPECT_FALSE(sc.vehicles.empty());
  }
}

TEST(BundledCourses, RegenerationIsIdentical)
{
  const fs::path tmp = fs::temp_directory_path() / "glosa_courses_regen";
  fs::remove_all(tmp);
  const auto files = write_bundled_courses(tmp);
  EXPECT_EQ(files.size(), 4u);
  for (const auto& f : files)
  {
    for (const auto& p : {f.waypoints, f.intersections})
    {
      std::ifstream a(p);
      std::ifstream b(fs::path(GLOSA_DATA_DIR) / "courses" / p.filename());
      ASSERT_TRUE(b.good()) << p.filename();
      const std::string sa((std::istreambuf_iterator<char>(a)), {});
      const std::string sb((std::istreambuf_iterator<char>(b)), {});
      EXPECT_EQ(sa, sb) << p.filename();
    }
  }
  fs::remove_all(tmp);
}

}  // namespace
}  // namespace glosa
