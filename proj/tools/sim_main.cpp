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

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "glosa/error.hpp"
#include "glosa/scenario.hpp"
#include "glosa/sim.hpp"

int main(int argc, char** argv)
{
  CLI::App app{"Deterministic intersection simulator"};
  app.require_subcommand(1);

  std::string scenario_file;
  std::string out_dir;
  std::string transport = "loopback";
  std::string rsu_address;
  std::string controller;
  std::optional<double> delay;
  std::optional<double> time_scale;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write telemetry");
  run_cmd->add_option("--scenario", scenario_file, "Scenario YAML")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory")->required();
  run_cmd->add_option("--transport", transport, "loopback or socket")
    ->check(CLI::IsMember({"loopback", "socket"}));
  run_cmd->add_option("--rsu", rsu_address, "RSU service host:port (socket transport)");
  run_cmd->add_option("--controller", controller, "Override every vehicle's controller")
    ->check(CLI::IsMember({"adaptive", "non_adaptive", "human"}));
  run_cmd->add_option("--delay", delay, "Loopback delivery delay in seconds");
  run_cmd->add_option("--time-scale", time_scale, "Socket transport: schedule seconds per wall second");

  std::string courses_dir;
  auto* courses_cmd = app.add_subcommand("make-courses", "Write the bundled synthetic courses");
  courses_cmd->add_option("--out", courses_dir, "Directory for the waypoint files")->required();

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (*courses_cmd)
    {
      for (const auto& f : glosa::write_bundled_courses(courses_dir))
        std::cout << f.id << ": " << f.waypoints.string() << ", " << f.intersections.string() << '\n';
      return 0;
    }

    glosa::ScenarioConfig cfg = glosa::load_scenario(scenario_file);
    if (!controller.empty())
      cfg = cfg.with_controller(glosa::parse_controller_kind(controller));
    if (transport == "socket")
    {
      cfg.transport.mode = glosa::TransportMode::Socket;
      if (!rsu_address.empty())
        cfg.transport.rsu_address = rsu_address;
    }
    if (delay)
      cfg.transport.delay_s = *delay;
    if (time_scale)
      cfg.transport.time_scale = *time_scale;

    const glosa::RunResult r = glosa::run(cfg);
    glosa::write_run(r, out_dir);
    const auto& dv = r.vehicle(r.designated_vehicle);
    std::printf("%s [%s] %s: end %.2f s, %zu crossings, %zu safety violations\n", r.scenario_id.c_str(),
                r.label.c_str(), std::string(glosa::to_string(r.designated_kind)).c_str(), r.end_t, dv.crossings,
                r.safety_violations);
    return r.safety_violations == 0 && r.protocol_errors == 0 ? 0 : 3;
  }
  catch (const std::exception& e)
  {
    std::cerr << "sim: " << e.what() << '\n';
    return 2;
  }
}
