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

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace glosa
{

/// Binary light state. There is no yellow: connected vehicles get the time left instead.
enum class PhaseColor
{
  Red,
  Green,
};

std::string_view to_string(PhaseColor c);
PhaseColor parse_phase_color(std::string_view s);

struct Phase
{
  PhaseColor color = PhaseColor::Green;
  double duration_s = 0.0;
};

struct PhaseSnapshot
{
  PhaseColor color = PhaseColor::Green;
  double time_remaining_s = 0.0;
  double next_duration_s = 0.0;
  /// Completed cycles since the epoch.
  std::uint64_t cycle_index = 0;
  /// Position of the active phase within the cycle.
  std::size_t phase_index = 0;

  friend bool operator==(const PhaseSnapshot&, const PhaseSnapshot&) = default;
};

struct PhaseTransition
{
  double t = 0.0;
  PhaseSnapshot incoming;
};

/// Half-open interval [start, end) of green, in absolute simulation seconds.
struct GreenWindow
{
  double start = 0.0;
  double end = 0.0;
};

/// Cyclic schedule of timed red/green phases starting at `epoch`.
///
/// A transition instant belongs to the incoming phase. Instants within
/// kBoundaryTolerance of a boundary snap onto it so that tick times built as
/// k * dt land on the intended side.
class PhaseSchedule
{
public:
  static constexpr double kBoundaryTolerance = 1e-9;

  PhaseSchedule(std::vector<Phase> phases, double epoch_s = 0.0);

  const std::vector<Phase>& phases() const { return phases_; }
  double epoch() const { return epoch_; }
  double cycle_length() const { return cycle_; }

  PhaseSnapshot snapshot_at(double t) const;
  GreenWindow next_green_arrival_window(double t) const;
  /// Every phase change in (t0, t1], in order, each with the incoming phase's snapshot.
  std::vector<PhaseTransition> transitions_between(double t0, double t1) const;

private:
  struct Position
  {
    std::uint64_t cycle = 0;
    std::size_t phase = 0;
    double phase_start = 0.0;  // absolute
  };
  Position locate(double t) const;
  double start_of(std::uint64_t cycle, std::size_t phase) const;

  std::vector<Phase> phases_;
  std::vector<double> offsets_;  // phase start within the cycle
  double epoch_;
  double cycle_ = 0.0;
};

}  // namespace glosa
