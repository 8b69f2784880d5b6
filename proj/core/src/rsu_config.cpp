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

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "glosa/error.hpp"
#include "glosa/rsu_service.hpp"
#include "yaml_util.hpp"

namespace glosa
{

std::pair<std::string, std::uint16_t> parse_address(const std::string& addr)
{
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size())
    throw InvalidInput("address must look like host:port, got '" + addr + "'");
  const std::string host = addr.substr(0, colon);
  int port = 0;
  try
  {
    std::size_t used = 0;
    port = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1)
      throw std::invalid_argument("trailing characters");
  }
  catch (const std::exception&)
  {
    throw InvalidInput("bad port in '" + addr + "'");
  }
  if (port < 0 || port > 65535)
    throw InvalidInput("port out of range in '" + addr + "'");
  return {host, static_cast<std::uint16_t>(port)};
}

RsuConfig parse_rsu_config(const std::string& yaml_text)
{
  YAML::Node root;
  try
  {
    root = YAML::Load(yaml_text);
  }
  catch (const YAML::Exception& e)
  {
    throw LoadError(std::string("RSU config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap())
    throw LoadError("RSU config must be a mapping");

  RsuConfig cfg;
  try
  {
    if (root["listen"])
    {
      auto [host, port] = parse_address(root["listen"].as<std::string>());
      cfg.host = host;
      cfg.port = port;
    }
    cfg.time_offset_s = root["time_offset_s"].as<double>(cfg.time_offset_s);
    cfg.time_scale = root["time_scale"].as<double>(cfg.time_scale);
    if (root["publish_hz"])
      cfg.cadence.publish_period_s = 1.0 / root["publish_hz"].as<double>();
    if (root["heartbeat_hz"])
      cfg.cadence.heartbeat_period_s = 1.0 / root["heartbeat_hz"].as<double>();
    cfg.cadence.heartbeat_timeout_s = root["heartbeat_timeout_s"].as<double>(cfg.cadence.heartbeat_timeout_s);
    cfg.lights = parse_light_definitions(root["lights"]);
  }
  catch (const YAML::Exception& e)
  {
    throw LoadError(std::string("RSU config: ") + e.what());
  }
  catch (const InvalidInput& e)
  {
    throw LoadError(std::string("RSU config: ") + e.what());
  }
  if (!(cfg.time_scale > 0.0))
    throw LoadError("RSU config: time_scale must be positive");
  if (!(cfg.cadence.publish_period_s > 0.0) || !(cfg.cadence.heartbeat_period_s > 0.0) ||
      !(cfg.cadence.heartbeat_timeout_s > 0.0))
    throw LoadError("RSU config: cadences must be positive");
  return cfg;
}

RsuConfig load_rsu_config(const std::filesystem::path& file)
{
  std::ifstream in(file);
  if (!in)
    throw LoadError("cannot open RSU config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rsu_config(ss.str());
}

}  // namespace glosa
