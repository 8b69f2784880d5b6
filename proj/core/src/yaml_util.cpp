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

#include "yaml_util.hpp"

#include <string>

#include "glosa/error.hpp"

namespace glosa
{

std::vector<LightDefinition> parse_light_definitions(const YAML::Node& node)
{
  if (!node || !node.IsSequence() || node.size() == 0)
    throw InvalidInput("'lights' must be a non-empty list");
  std::vector<LightDefinition> out;
  for (const auto& l : node)
  {
    const auto id = l["id"].as<std::string>();
    const auto phases_node = l["phases"];
    if (!phases_node || !phases_node.IsSequence())
      throw InvalidInput("light '" + id + "' needs a 'phases' list");
    std::vector<Phase> phases;
    for (const auto& p : phases_node)
      phases.push_back(Phase{parse_phase_color(p["color"].as<std::string>()), p["duration_s"].as<double>()});
    out.push_back(LightDefinition{id, PhaseSchedule(std::move(phases), l["epoch_s"].as<double>(0.0))});
  }
  return out;
}

}  // namespace glosa
