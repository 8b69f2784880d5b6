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

#include <cmath>

#include "glosa/error.hpp"
#include "glosa/rsu_service.hpp"

namespace glosa
{

RsuBroadcaster::RsuBroadcaster(std::vector<LightDefinition> lights, RsuCadence cadence, double start_time)
  : cadence_(cadence), start_time_(start_time), last_tick_(start_time)
{
  if (lights.empty())
    throw InvalidInput("RSU needs at least one light");
  if (!(cadence_.publish_period_s > 0.0) || !(cadence_.heartbeat_period_s > 0.0) ||
      !(cadence_.heartbeat_timeout_s > 0.0))
    throw InvalidInput("RSU cadences must be positive");
  for (auto& l : lights)
  {
    if (l.id.empty())
      throw InvalidInput("light id must not be empty");
    if (l.schedule.epoch() > start_time + PhaseSchedule::kBoundaryTolerance)
      throw InvalidInput("light '" + l.id + "' schedule starts after the RSU clock");
    if (!lights_.emplace(l.id, l.schedule).second)
      throw InvalidInput("duplicate light id '" + l.id + "'");
  }
}

std::uint64_t RsuBroadcaster::next_seq(const std::string& light, MessageKind kind)
{
  return ++seq_[{light, kind}];
}

std::vector<RsuMessage> RsuBroadcaster::snapshot_messages(const std::string& light, double now)
{
  const PhaseSnapshot snap = lights_.at(light).snapshot_at(now);
  return {
    RsuMessage::time_left(light, snap.time_remaining_s, next_seq(light, MessageKind::TimeLeft), now),
    RsuMessage::next_duration(light, snap.next_duration_s, next_seq(light, MessageKind::NextDuration), now),
    RsuMessage::state_change(light, snap.color, next_seq(light, MessageKind::StateChange), now),
  };
}

std::vector<RsuMessage> RsuBroadcaster::subscribe(const SubscribeRequest& req, std::shared_ptr<MessageSink> sink,
                                                  double now)
{
  if (req.client_id.empty())
    throw InvalidInput("subscribe needs a client_id");
  if (req.light_ids.empty())
    throw InvalidInput("subscribe needs at least one light id");
  for (const auto& id : req.light_ids)
  {
    if (!has_light(id))
      throw InvalidInput("unknown light id '" + id + "'");
  }

  std::vector<RsuMessage> initial;
  for (const auto& id : req.light_ids)
  {
    auto msgs = snapshot_messages(id, now);
    initial.insert(initial.end(), msgs.begin(), msgs.end());
  }

  for (const auto& m : initial)
  {
    if (!sink->deliver(m))
      return {};
  }

  std::lock_guard lock(sessions_mutex_);
  ClientSession& s = sessions_[req.client_id];
  s.client_id = req.client_id;
  s.subscribed_lights = {req.light_ids.begin(), req.light_ids.end()};
  s.last_seen = now;
  s.sink = std::move(sink);
  return initial;
}

void RsuBroadcaster::unsubscribe(const std::string& client_id, const MessageSink* sink)
{
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(client_id);
  if (it != sessions_.end() && (sink == nullptr || it->second.sink.get() == sink))
    sessions_.erase(it);
}

std::size_t RsuBroadcaster::session_count() const
{
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

std::vector<std::string> RsuBroadcaster::session_ids() const
{
  std::lock_guard lock(sessions_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_)
    ids.push_back(id);
  return ids;
}

std::vector<Delivery> RsuBroadcaster::broadcast_tick(double now)
{
  if (now < last_tick_)
    throw InvalidInput("broadcast_tick: clock went backwards");

  const auto due = [&](double period) {
    return static_cast<std::uint64_t>(std::floor((now - start_time_) / period + 1e-9));
  };
  const std::uint64_t publish_due = due(cadence_.publish_period_s);
  const std::uint64_t heartbeat_due = due(cadence_.heartbeat_period_s);
  const bool publish = publish_due > publish_count_;
  const bool heartbeat = heartbeat_due > heartbeat_count_;
  publish_count_ = publish_due;
  heartbeat_count_ = heartbeat_due;

  // Build each light's messages once; seq numbers are shared across subscribers.
  std::map<std::string, std::vector<RsuMessage>> outgoing;
  for (const auto& [id, schedule] : lights_)
  {
    auto& out = outgoing[id];
    for (const auto& tr : schedule.transitions_between(last_tick_, now))
    {
      out.push_back(
        RsuMessage::time_left(id, tr.incoming.time_remaining_s, next_seq(id, MessageKind::TimeLeft), tr.t));
      out.push_back(
        RsuMessage::next_duration(id, tr.incoming.next_duration_s, next_seq(id, MessageKind::NextDuration), tr.t));
      out.push_back(RsuMessage::state_change(id, tr.incoming.color, next_seq(id, MessageKind::StateChange), tr.t));
    }
    if (publish)
    {
      const PhaseSnapshot snap = schedule.snapshot_at(now);
      out.push_back(RsuMessage::time_left(id, snap.time_remaining_s, next_seq(id, MessageKind::TimeLeft), now));
      out.push_back(RsuMessage::next_duration(id, snap.next_duration_s, next_seq(id, MessageKind::NextDuration), now));
    }
    if (heartbeat)
      out.push_back(RsuMessage::heartbeat(id, next_seq(id, MessageKind::Heartbeat), now));
  }
  last_tick_ = now;

  std::vector<Delivery> sent;
  std::lock_guard lock(sessions_mutex_);
  for (auto it = sessions_.begin(); it != sessions_.end();)
  {
    ClientSession& s = it->second;
    bool alive = true;
    for (const auto& light : s.subscribed_lights)
    {
      for (const auto& m : outgoing[light])
      {
        if (!s.sink->deliver(m))
        {
          alive = false;
          break;
        }
        sent.push_back({s.client_id, m});
      }
      if (!alive)
        break;
    }
    if (alive)
    {
      s.last_seen = now;
      ++it;
    }
    else
    {
      it = sessions_.erase(it);
    }
  }
  return sent;
}

}  // namespace glosa
