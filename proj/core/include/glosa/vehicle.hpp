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
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "glosa/rsu_protocol.hpp"
#include "glosa/signal_phase.hpp"

namespace glosa
{

enum class ControllerKind
{
  Adaptive,
  NonAdaptive,
  Human,
};

std::string_view to_string(ControllerKind k);
ControllerKind parse_controller_kind(std::string_view s);

struct ControllerConfig
{
  ControllerKind kind = ControllerKind::Adaptive;
  double v_max = 2.24;  // 5 mph
  double v_min = 0.25;
  /// Hard limit on |dv/dt| applied by the kinematics.
  double a_max = 2.0;
  /// Deceleration used to plan stops at the stop line.
  double d_comfort = 1.5;
  /// Acceleration a human uses to get back up to speed.
  double a_comfort = 1.0;
  /// Length of the conflict zone centred on the intersection waypoint.
  double intersection_clear_length = 6.0;
  /// Planned stops end this far short of the zone.
  double stop_buffer = 0.3;
  /// The adaptive cruise plan aims this long after the green onset.
  double arrival_margin_s = 0.05;
  double reaction_delay_s = 0.75;
  double warning_lead_s = 5.0;

  void validate() const;
};

struct VehicleState
{
  double arc_position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
  std::uint64_t lap_count = 0;
  bool connected = false;
  double target_velocity = 0.0;
};

/// The vehicle's picture of its light, assembled from the RSU streams.
///
/// time_left is valid at `time_left_stamp` (the message timestamp) and is projected
/// forward from there.
struct LightBelief
{
  PhaseColor color = PhaseColor::Red;
  double time_left = 0.0;
  double time_left_stamp = 0.0;
  double next_duration = 0.0;
  /// Full length of the current phase, learned from the TimeLeft sent with each change.
  double phase_duration = 0.0;
  double last_update = -std::numeric_limits<double>::infinity();
  bool connected = false;
  bool has_state = false;
  std::uint64_t state_seq = 0;
  std::uint64_t time_left_seq = 0;
  std::uint64_t next_duration_seq = 0;

  double time_left_at(double now) const;
};

/// Which branch of the speed decision produced the target.
enum class DecisionRule
{
  Disconnected,  // connection lost: keep the target
  Crossable,     // green and clearable at current speed: keep the target
  Synchronized,  // distance over time-to-green, within [v_min, v_max]
  ClampedLow,    // average below v_min
  ClampedHigh,   // average above v_max, v_max still reaches the next green
  Fallback,      // v_max misses the next green too: plain stop-at-red driving
};

std::string_view to_string(DecisionRule r);

struct Decision
{
  double target = 0.0;
  DecisionRule rule = DecisionRule::Crossable;
  double average_velocity = std::numeric_limits<double>::quiet_NaN();
  double delta_x = std::numeric_limits<double>::quiet_NaN();
  double delta_t = std::numeric_limits<double>::quiet_NaN();
  GreenWindow window{};
};

/// Green window following the current phase as implied by the belief: for red the
/// upcoming green, for green the one after the next red.
GreenWindow belief_next_green(const LightBelief& belief, double now);

/// The adaptive speed decision, run at every light state change.
///
/// Disconnected or already able to clear on green: the previous target stands.
/// Otherwise the target is the average velocity dist / dt with dt the time until the
/// next green begins, clamped to [v_min, v_max].
Decision decide_target_velocity(const VehicleState& state, const LightBelief& belief, double dist_to_intersection,
                                const ControllerConfig& cfg, double now);

/// Constant speed u such that ramping from v0 to u at `accel` and then holding u covers
/// `distance` in exactly `duration`. Falls back to distance / duration when the ramp
/// alone would not fit.
double cruise_speed_for_average(double v0, double distance, double duration, double accel);

/// First-order speed tracking under |a| <= a_max with trapezoidal displacement.
/// The arc position wraps at `loop_length`, bumping lap_count.
VehicleState step_kinematics(const VehicleState& state, double target, double dt, const ControllerConfig& cfg,
                             double loop_length = std::numeric_limits<double>::infinity());

/// Speed that brings the vehicle to rest `stop_buffer` short of a line `dist` ahead
/// when braking at d_comfort.
double stop_profile_speed(double dist, const ControllerConfig& cfg);

/// What a vehicle can sense about its approach on a given tick.
struct ApproachView
{
  double dist_to_stop_line = std::numeric_limits<double>::infinity();
  /// The light as seen through the windshield.
  PhaseColor visible_color = PhaseColor::Red;
  /// Seconds until the visible light changes; drives the human's verbal warning.
  double visible_time_left = 0.0;
};

struct TickReport
{
  std::optional<Decision> decision;
  bool lost_connection = false;
  bool regained_connection = false;
  bool ignored_stale = false;
  double command = 0.0;
};

/// One vehicle: belief maintenance, the controller for its kind, and kinematics.
///
/// Per tick the owner calls receive() for delivered messages, prepare() to settle
/// connection state, decision and command, reads state() for telemetry, then advance().
class VehicleAgent
{
public:
  VehicleAgent(std::string id, ControllerConfig cfg, double start_arc, double loop_length,
               double heartbeat_timeout_s = 1.5, double reaction_delay_s = -1.0);

  const std::string& id() const { return id_; }
  const ControllerConfig& config() const { return cfg_; }
  const VehicleState& state() const { return state_; }
  const LightBelief& belief() const { return belief_; }
  bool released() const { return released_; }
  double command() const { return command_; }

  void release(double now);
  /// Applies one RSU message. Returns false when it was stale (old seq).
  bool receive(const RsuMessage& m, double now);
  TickReport prepare(const ApproachView& view, double now, double dt);
  void advance(double dt);

private:
  double adaptive_command(const ApproachView& view, double now, TickReport& report);
  double non_adaptive_command(const ApproachView& view, double now) const;
  double human_command(const ApproachView& view, double now, double dt);
  /// Applies the stop-at-red rule against the belief to a desired speed.
  double guard(double desired, double dist, double now) const;

  std::string id_;
  ControllerConfig cfg_;
  double loop_length_;
  double heartbeat_timeout_s_;
  double reaction_delay_s_;
  VehicleState state_;
  LightBelief belief_;
  bool released_ = false;
  bool decision_pending_ = false;
  bool was_connected_ = false;
  double cruise_ = 0.0;
  double command_ = 0.0;

  // human driver bookkeeping
  bool human_stopping_ = false;
  bool human_warned_ = false;
  bool human_held_by_red_ = false;
  double human_green_onset_ = -std::numeric_limits<double>::infinity();
  PhaseColor human_last_seen_ = PhaseColor::Red;
};

}  // namespace glosa
