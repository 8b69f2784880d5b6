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

#include "glosa/signal_phase.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "glosa/error.hpp"

namespace glosa
{

std::string_view to_string(PhaseColor c)
{
  return c == PhaseColor::Green ? "green" : "red";
}

PhaseColor parse_phase_color(std::string_view s)
{
  if (s == "green" || s == "Green" || s == "GREEN")
    return PhaseColor::Green;
  if (s == "red" || s == "Red" || s == "RED")
    return PhaseColor::Red;
  throw InvalidInput("unknown phase color '" + std::string(s) + "'");
}

PhaseSchedule::PhaseSchedule(std::vector<Phase> phases, double epoch_s) : phases_(std::move(phases)), epoch_(epoch_s)
{
  if (!std::isfinite(epoch_))
    throw InvalidInput("schedule epoch must be finite");
  bool has_green = false;
  bool has_red = false;
  offsets_.reserve(phases_.size());
  for (const auto& p : phases_)
  {
    if (!std::isfinite(p.duration_s) || p.duration_s <= 0.0)
      throw InvalidInput("phase durations must be positive and finite");
    has_green |= p.color == PhaseColor::Green;
    has_red |= p.color == PhaseColor::Red;
    offsets_.push_back(cycle_);
    cycle_ += p.duration_s;
  }
  if (!has_green || !has_red)
    throw InvalidInput("schedule needs at least one green and one red phase");
}

double PhaseSchedule::start_of(std::uint64_t cycle, std::size_t phase) const
{
  return epoch_ + static_cast<double>(cycle) * cycle_ + offsets_[phase];
}

PhaseSchedule::Position PhaseSchedule::locate(double t) const
{
  if (!std::isfinite(t))
    throw InvalidInput("time must be finite");
  if (t < epoch_ - kBoundaryTolerance)
    throw InvalidInput("time " + std::to_string(t) + " precedes schedule epoch " + std::to_string(epoch_));

  const double rel = std::max(0.0, t - epoch_);
  auto cycle = static_cast<std::uint64_t>(std::floor(rel / cycle_));
  // The division can land one cycle short (or long) right at a boundary.
  if (start_of(cycle + 1, 0) <= t + kBoundaryTolerance)
    ++cycle;
  else if (cycle > 0 && start_of(cycle, 0) > t + kBoundaryTolerance)
    --cycle;

  std::size_t phase = 0;
  for (std::size_t i = 1; i < phases_.size(); ++i)
  {
    if (start_of(cycle, i) <= t + kBoundaryTolerance)
      phase = i;
    else
      break;
  }
  return Position{cycle, phase, start_of(cycle, phase)};
}

PhaseSnapshot PhaseSchedule::snapshot_at(double t) const
{
  const Position pos = locate(t);
  const Phase& cur = phases_[pos.phase];
  const Phase& next = phases_[(pos.phase + 1) % phases_.size()];
  const double elapsed = std::max(0.0, t - pos.phase_start);
  double remaining = cur.duration_s - elapsed;
  if (remaining <= 0.0)
    remaining = cur.duration_s;  // only reachable through boundary snapping
  return PhaseSnapshot{cur.color, std::min(remaining, cur.duration_s), next.duration_s, pos.cycle, pos.phase};
}

GreenWindow PhaseSchedule::next_green_arrival_window(double t) const
{
  Position pos = locate(t);
  const std::size_t n = phases_.size();

  // Extend a green start backwards/forwards over adjacent green phases so a run of
  // green phases counts as one window.
  auto green_run_end = [&](std::uint64_t cycle, std::size_t phase) {
    while (phases_[phase].color == PhaseColor::Green)
    {
      phase = (phase + 1) % n;
      if (phase == 0)
        ++cycle;
    }
    return start_of(cycle, phase);
  };

  if (phases_[pos.phase].color == PhaseColor::Green)
    return GreenWindow{t, green_run_end(pos.cycle, pos.phase)};

  std::uint64_t cycle = pos.cycle;
  std::size_t phase = pos.phase;
  while (phases_[phase].color != PhaseColor::Green)
  {
    phase = (phase + 1) % n;
    if (phase == 0)
      ++cycle;
  }
  const double start = start_of(cycle, phase);
  return GreenWindow{start, green_run_end(cycle, phase)};
}

std::vector<PhaseTransition> PhaseSchedule::transitions_between(double t0, double t1) const
{
  if (t1 < t0)
    throw InvalidInput("transitions_between: t1 < t0");
  std::vector<PhaseTransition> out;
  Position pos = locate(t0);
  const std::size_t n = phases_.size();
  while (true)
  {
    std::size_t phase = (pos.phase + 1) % n;
    std::uint64_t cycle = pos.cycle + (phase == 0 ? 1 : 0);
    const double t = start_of(cycle, phase);
    if (t > t1 + kBoundaryTolerance)
      break;
    // Adjacent phases of the same color are not a visible change.
    if (phases_[phase].color != phases_[pos.phase].color)
    {
      const Phase& next = phases_[(phase + 1) % n];
      out.push_back({t, PhaseSnapshot{phases_[phase].color, phases_[phase].duration_s, next.duration_s, cycle, phase}});
    }
    pos = Position{cycle, phase, t};
  }
  return out;
}

}  // namespace glosa
