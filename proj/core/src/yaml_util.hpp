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

// Shared YAML readers for light definitions. Internal to the core library.

#include <vector>

#include <yaml-cpp/yaml.h>

#include "glosa/rsu_service.hpp"

namespace glosa
{

/// Parses `[{id, epoch_s?, phases: [{color, duration_s}]}]`.
std::vector<LightDefinition> parse_light_definitions(const YAML::Node& node);

}  // namespace glosa
