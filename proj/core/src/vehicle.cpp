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

#include "glosa/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "glosa/error.hpp"

namespace glosa
{
namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(double v, const char* what)
{
  if (!std::isfinite(v))
    throw InvalidInput(std::string("non-finite ") + what);
}

/// Time to cover `dist` starting at v0 while moving toward speed u at rate `accel`.
double time_to_cover(double dist, double v0, double u, double accel)
{
  if (dist <= 0.0)
    return 0.0;
  const double ramp_t = std::abs(u - v0) / accel;
  const double ramp_d = 0.5 * (v0 + u) * ramp_t;
  if (ramp_d >= dist)
  {
    if (u >= v0)
      return (std::sqrt(v0 * v0 + 2.0 * accel * dist) - v0) / accel;
    const double disc = v0 * v0 - 2.0 * accel * dist;
    return disc < 0.0 ? kInf : (v0 - std::sqrt(disc)) / accel;
  }
  if (u <= 0.0)
    return kInf;
  return ramp_t + (dist - ramp_d) / u;
}

/// Is the light green throughout [t_enter, t_exit] according to the belief? The light
/// is projected as two alternating phases: the current one and the announced next one.
bool belief_green_over(const LightBelief& b, double now, double t_enter, double t_exit)
{
  if (!std::isfinite(t_enter) || !std::isfinite(t_exit))
    return false;
  constexpr double tol = PhaseSchedule::kBoundaryTolerance;
  const double current_len = b.phase_duration > 0.0 ? b.phase_duration : b.time_left_at(now);

  double seg_start = now;
  double seg_end = now + b.time_left_at(now);
  PhaseColor color = b.color;
  while (seg_start <= t_exit + tol)
  {
    if (t_enter < seg_end - tol)
      return color == PhaseColor::Green && t_exit <= seg_end + tol;
    color = color == PhaseColor::Green ? PhaseColor::Red : PhaseColor::Green;
    const double len = color == b.color ? current_len : b.next_duration;
    if (!(len > 0.0))
      return false;
    seg_start = seg_end;
    seg_end = seg_start + len;
  }
  return false;
}

}  // namespace

std::string_view to_string(ControllerKind k)
{
  switch (k)
  {
    case ControllerKind::Adaptive:
      return "adaptive";
    case ControllerKind::NonAdaptive:
      return "non_adaptive";
    case ControllerKind::Human:
      return "human";
  }
  return "adaptive";
}

ControllerKind parse_controller_kind(std::string_view s)
{
  if (s == "adaptive")
    return ControllerKind::Adaptive;
  if (s == "non_adaptive" || s == "non-adaptive" || s == "nonadaptive")
    return ControllerKind::NonAdaptive;
  if (s == "human")
    return ControllerKind::Human;
  throw InvalidInput("unknown controller kind '" + std::string(s) + "'");
}

std::string_view to_string(DecisionRule r)
{
  switch (r)
  {
    case DecisionRule::Disconnected:
      return "disconnected";
    case DecisionRule::Crossable:
      return "crossable";
    case DecisionRule::Synchronized:
      return "synchronized";
    case DecisionRule::ClampedLow:
      return "clamped_low";
    case DecisionRule::ClampedHigh:
      return "clamped_high";
    case DecisionRule::Fallback:
      return "fallback";
  }
  return "crossable";
}

void ControllerConfig::validate() const
{
  for (double v : {v_max, v_min, a_max, d_comfort, a_comfort, intersection_clear_length, stop_buffer,
                   arrival_margin_s, reaction_delay_s, warning_lead_s})
    require_finite(v, "controller parameter");
  if (!(v_min > 0.0 && v_min < v_max))
    throw InvalidInput("controller config needs 0 < v_min < v_max");
  if (!(a_max > 0.0) || !(d_comfort > 0.0) || !(a_comfort > 0.0))
    throw InvalidInput("controller accelerations must be positive");
  if (intersection_clear_length < 0.0 || stop_buffer < 0.0 || arrival_margin_s < 0.0 || reaction_delay_s < 0.0 ||
      warning_lead_s < 0.0)
    throw InvalidInput("controller lengths and delays must be non-negative");
}

double LightBelief::time_left_at(double now) const
{
  return std::max(0.0, time_left - (now - time_left_stamp));
}

GreenWindow belief_next_green(const LightBelief& belief, double now)
{
  const double tl = belief.time_left_at(now);
  if (belief.color == PhaseColor::Red)
  {
    const double start = now + tl;
    return {start, start + belief.next_duration};
  }
  const double start = now + tl + belief.next_duration;
  const double green_len = belief.phase_duration > 0.0 ? belief.phase_duration : tl;
  return {start, start + green_len};
}

Decision decide_target_velocity(const VehicleState& state, const LightBelief& belief, double dist_to_intersection,
                                const ControllerConfig& cfg, double now)
{
  require_finite(state.velocity, "velocity");
  require_finite(state.target_velocity, "target velocity");
  require_finite(dist_to_intersection, "distance");
  require_finite(now, "time");
  require_finite(belief.time_left, "time left");
  require_finite(belief.next_duration, "next duration");
  if (!(dist_to_intersection > 0.0))
    throw InvalidInput("distance to intersection must be positive");

  Decision d;
  d.target = state.target_velocity;
  d.delta_x = dist_to_intersection;

  if (!belief.connected)
  {
    d.rule = DecisionRule::Disconnected;
    return d;
  }

  const double time_left = belief.time_left_at(now);
  if (belief.color == PhaseColor::Green)
  {
    const double crossing =
      state.velocity > 0.0 ? (dist_to_intersection + cfg.intersection_clear_length) / state.velocity : kInf;
    if (crossing <= time_left)
    {
      d.rule = DecisionRule::Crossable;
      return d;
    }
  }

  d.window = belief_next_green(belief, now);
  d.delta_t = d.window.start - now;
  if (!(d.delta_t > 0.0))
  {
    // Red with nothing left on the clock: the green is here.
    d.rule = DecisionRule::ClampedHigh;
    d.target = cfg.v_max;
    return d;
  }
  d.average_velocity = dist_to_intersection / d.delta_t;

  if (d.average_velocity > cfg.v_max)
  {
    const double arrival_at_vmax = now + dist_to_intersection / cfg.v_max;
    d.rule = arrival_at_vmax < d.window.end ? DecisionRule::ClampedHigh : DecisionRule::Fallback;
    d.target = cfg.v_max;
  }
  else if (d.average_velocity < cfg.v_min)
  {
    d.rule = DecisionRule::ClampedLow;
    d.target = cfg.v_min;
  }
  else
  {
    d.rule = DecisionRule::Synchronized;
    d.target = d.average_velocity;
  }
  return d;
}

double cruise_speed_for_average(double v0, double distance, double duration, double accel)
{
  if (!(duration > 0.0) || !(accel > 0.0) || !(distance >= 0.0))
    throw InvalidInput("cruise_speed_for_average needs positive duration and acceleration");
  const double v_avg = distance / duration;
  if (v_avg == v0)
    return v_avg;

  double u;
  if (v_avg < v0)
  {
    // u*T + (v0 - u)^2 / (2a) = D
    const double b = v0 - accel * duration;
    const double disc = b * b - v0 * v0 + 2.0 * accel * distance;
    if (disc < 0.0)
      return v_avg;
    u = b + std::sqrt(disc);
  }
  else
  {
    // u*T - (u - v0)^2 / (2a) = D
    const double b = v0 + accel * duration;
    const double disc = b * b - v0 * v0 - 2.0 * accel * distance;
    if (disc < 0.0)
      return v_avg;
    u = b - std::sqrt(disc);
  }
  if (!std::isfinite(u) || u < 0.0 || std::abs(u - v0) / accel > duration)
    return v_avg;
  return u;
}

VehicleState step_kinematics(const VehicleState& state, double target, double dt, const ControllerConfig& cfg,
                             double loop_length)
{
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw InvalidInput("dt must be positive");
  require_finite(target, "target");
  target = std::clamp(target, 0.0, cfg.v_max);

  VehicleState next = state;
  const double max_dv = cfg.a_max * dt;
  const double dv = std::clamp(target - state.velocity, -max_dv, max_dv);
  next.velocity = std::max(0.0, state.velocity + dv);
  next.acceleration = (next.velocity - state.velocity) / dt;
  next.arc_position = state.arc_position + 0.5 * (state.velocity + next.velocity) * dt;
  if (std::isfinite(loop_length))
  {
    while (next.arc_position >= loop_length)
    {
      next.arc_position -= loop_length;
      ++next.lap_count;
    }
  }
  return next;
}

double stop_profile_speed(double dist, const ControllerConfig& cfg)
{
  const double room = dist - cfg.stop_buffer;
  if (room <= 0.0)
    return 0.0;
  return std::sqrt(2.0 * cfg.d_comfort * room);
}

VehicleAgent::VehicleAgent(std::string id, ControllerConfig cfg, double start_arc, double loop_length,
                           double heartbeat_timeout_s, double reaction_delay_s)
  : id_(std::move(id)), cfg_(cfg), loop_length_(loop_length), heartbeat_timeout_s_(heartbeat_timeout_s),
    reaction_delay_s_(reaction_delay_s >= 0.0 ? reaction_delay_s : cfg.reaction_delay_s)
{
  cfg_.validate();
  if (!(loop_length_ > 0.0))
    throw InvalidInput("loop length must be positive");
  if (!(heartbeat_timeout_s_ > 0.0))
    throw InvalidInput("heartbeat timeout must be positive");
  if (!std::isfinite(start_arc) || start_arc < 0.0)
    throw InvalidInput("start arc must be non-negative");
  state_.arc_position = std::fmod(start_arc, loop_length_);
  state_.target_velocity = cfg_.v_max;
  cruise_ = cfg_.v_max;
}

void VehicleAgent::release(double now)
{
  if (released_)
    return;
  released_ = true;
  decision_pending_ = true;
  human_green_onset_ = now - reaction_delay_s_;
  human_last_seen_ = PhaseColor::Green;
}

bool VehicleAgent::receive(const RsuMessage& m, double now)
{
  switch (m.kind)
  {
    case MessageKind::StateChange:
      if (m.seq <= belief_.state_seq)
        return false;
      belief_.state_seq = m.seq;
      belief_.color = *m.color;
      belief_.has_state = true;
      // The TimeLeft sent with a change carries the full phase length.
      if (belief_.time_left_stamp == m.timestamp)
        belief_.phase_duration = belief_.time_left;
      decision_pending_ = true;
      break;
    case MessageKind::TimeLeft:
      if (m.seq <= belief_.time_left_seq)
        return false;
      belief_.time_left_seq = m.seq;
      belief_.time_left = *m.seconds;
      belief_.time_left_stamp = m.timestamp;
      break;
    case MessageKind::NextDuration:
      if (m.seq <= belief_.next_duration_seq)
        return false;
      belief_.next_duration_seq = m.seq;
      belief_.next_duration = *m.seconds;
      break;
    case MessageKind::Heartbeat:
      break;
  }
  belief_.last_update = now;
  belief_.connected = true;
  return true;
}

TickReport VehicleAgent::prepare(const ApproachView& view, double now, double dt)
{
  TickReport report;
  if (belief_.connected && now - belief_.last_update > heartbeat_timeout_s_)
  {
    belief_.connected = false;
    report.lost_connection = true;
  }
  if (belief_.connected && !was_connected_)
  {
    report.regained_connection = true;
    decision_pending_ = true;
  }
  was_connected_ = belief_.connected;
  state_.connected = belief_.connected;

  if (!released_)
  {
    command_ = 0.0;
    report.command = 0.0;
    return report;
  }

  double cmd = 0.0;
  switch (cfg_.kind)
  {
    case ControllerKind::Adaptive:
      cmd = adaptive_command(view, now, report);
      break;
    case ControllerKind::NonAdaptive:
      state_.target_velocity = cfg_.v_max;
      cmd = non_adaptive_command(view, now);
      break;
    case ControllerKind::Human:
      state_.target_velocity = cfg_.v_max;
      cmd = human_command(view, now, dt);
      break;
  }
  command_ = std::clamp(cmd, 0.0, cfg_.v_max);
  report.command = command_;
  return report;
}

void VehicleAgent::advance(double dt)
{
  state_ = step_kinematics(state_, command_, dt, cfg_, loop_length_);
}

double VehicleAgent::adaptive_command(const ApproachView& view, double now, TickReport& report)
{
  if (decision_pending_ && belief_.has_state)
  {
    decision_pending_ = false;
    const Decision d = decide_target_velocity(state_, belief_, view.dist_to_stop_line, cfg_, now);
    state_.target_velocity = d.target;
    switch (d.rule)
    {
      case DecisionRule::Synchronized:
        cruise_ = std::min(cfg_.v_max, cruise_speed_for_average(state_.velocity, d.delta_x,
                                                                d.delta_t + cfg_.arrival_margin_s, cfg_.a_max));
        break;
      case DecisionRule::ClampedLow:
      case DecisionRule::ClampedHigh:
      case DecisionRule::Fallback:
        cruise_ = d.target;
        break;
      case DecisionRule::Disconnected:
      case DecisionRule::Crossable:
        break;
    }
    report.decision = d;
  }
  // Without a link the vehicle keeps doing what it was doing.
  if (!belief_.connected)
    return cruise_;
  return guard(cruise_, view.dist_to_stop_line, now);
}

double VehicleAgent::non_adaptive_command(const ApproachView& view, double now) const
{
  if (!belief_.has_state)
    return cfg_.v_max;
  return guard(cfg_.v_max, view.dist_to_stop_line, now);
}

double VehicleAgent::guard(double desired, double dist, double now) const
{
  if (!belief_.has_state || !std::isfinite(dist))
    return desired;
  const double v = state_.velocity;
  const double t_enter = now + time_to_cover(dist, v, desired, cfg_.a_max);
  const double t_exit = now + time_to_cover(dist + cfg_.intersection_clear_length, v, desired, cfg_.a_max);
  if (belief_green_over(belief_, now, t_enter, t_exit))
    return desired;

  // Unsafe to go. Stop if full braking still halts short of the zone, otherwise commit.
  const bool can_stop = dist > 0.0 ? v * v / (2.0 * dist) <= cfg_.a_max : v == 0.0;
  if (!can_stop)
    return desired;
  return std::min(desired, stop_profile_speed(dist, cfg_));
}

double VehicleAgent::human_command(const ApproachView& view, double now, double dt)
{
  const double dist = view.dist_to_stop_line;
  const double v = state_.velocity;

  if (view.visible_color == PhaseColor::Red)
  {
    if (human_last_seen_ == PhaseColor::Green)
      human_warned_ = false;
    human_last_seen_ = PhaseColor::Red;
    human_stopping_ = true;
    human_held_by_red_ = true;
  }
  else
  {
    if (human_last_seen_ == PhaseColor::Red)
    {
      human_green_onset_ = now;
      human_warned_ = false;
    }
    human_last_seen_ = PhaseColor::Green;
    if (human_held_by_red_ && now - human_green_onset_ >= reaction_delay_s_)
    {
      human_held_by_red_ = false;
      human_stopping_ = false;
    }

    if (!human_warned_ && view.visible_time_left <= cfg_.warning_lead_s)
    {
      human_warned_ = true;
      const double clear_time = v > 0.0 ? (dist + cfg_.intersection_clear_length) / v : kInf;
      if (clear_time > view.visible_time_left)
        human_stopping_ = true;
    }
  }

  const double cruise = std::min(cfg_.v_max, v + cfg_.a_comfort * dt);
  if (!human_stopping_)
    return cruise;
  // Once rolling too fast to stop short of the line, carry on through.
  if (dist > 0.0 && v * v / (2.0 * dist) > cfg_.a_max)
    return cruise;
  return std::min(cruise, stop_profile_speed(dist, cfg_));
}

}  // namespace glosa
