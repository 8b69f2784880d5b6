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
#include <string>

#include <CLI11.hpp>

#include "glosa/error.hpp"
#include "glosa/metrics.hpp"

int main(int argc, char** argv)
{
  CLI::App app{"Run comparison metrics"};
  app.require_subcommand(1);

  std::string runs_dir;
  std::string window = "35:65";
  std::string out_dir;
  auto* report = app.add_subcommand("report", "Average velocity table and acceleration reductions");
  report->add_option("--runs", runs_dir, "Directory of run directories")->required();
  report->add_option("--window", window, "start:end in seconds, or auto");
  report->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try
  {
    const auto runs = glosa::read_runs(runs_dir);
    const auto result = glosa::compare_runs(runs, glosa::parse_window(window));
    glosa::write_report(result, runs, out_dir);
    for (const auto& c : result.configs)
    {
      std::printf("%-8s human %.3f  non_adaptive %.3f  adaptive %.3f m/s  window [%.2f, %.2f]  reduction %.2f%%\n",
                  c.label.c_str(), c.average_velocity.at(glosa::ControllerKind::Human),
                  c.average_velocity.at(glosa::ControllerKind::NonAdaptive),
                  c.average_velocity.at(glosa::ControllerKind::Adaptive), c.window.t_start, c.window.t_end,
                  c.adaptive_vs_human_pct);
    }
    return 0;
  }
  catch (const std::exception& e)
  {
    std::cerr << "metrics: " << e.what() << '\n';
    return 2;
  }
}
