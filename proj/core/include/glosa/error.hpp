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

#include <stdexcept>
#include <string>

namespace glosa
{

/// Precondition violated by a caller (bad coordinate, unknown index, t < epoch, ...).
class InvalidInput : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A waypoint, scenario or config file could not be turned into a valid object.
class LoadError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Socket or protocol failure in the RSU service or its clients.
class TransportError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A simulation that cannot proceed (vehicle never released, run never terminates).
class RunError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace glosa
