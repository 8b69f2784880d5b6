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

#include "glosa/rsu_protocol.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "glosa/error.hpp"

namespace glosa
{

using nlohmann::json;

std::string_view to_string(MessageKind k)
{
  switch (k)
  {
    case MessageKind::StateChange:
      return "state_change";
    case MessageKind::TimeLeft:
      return "time_left";
    case MessageKind::NextDuration:
      return "next_duration";
    case MessageKind::Heartbeat:
      return "heartbeat";
  }
  return "heartbeat";
}

MessageKind parse_message_kind(std::string_view s)
{
  if (s == "state_change")
    return MessageKind::StateChange;
  if (s == "time_left")
    return MessageKind::TimeLeft;
  if (s == "next_duration")
    return MessageKind::NextDuration;
  if (s == "heartbeat")
    return MessageKind::Heartbeat;
  throw InvalidInput("unknown message kind '" + std::string(s) + "'");
}

RsuMessage RsuMessage::state_change(std::string light, PhaseColor c, std::uint64_t seq, double ts)
{
  return RsuMessage{MessageKind::StateChange, std::move(light), c, std::nullopt, seq, ts};
}

RsuMessage RsuMessage::time_left(std::string light, double s, std::uint64_t seq, double ts)
{
  return RsuMessage{MessageKind::TimeLeft, std::move(light), std::nullopt, s, seq, ts};
}

RsuMessage RsuMessage::next_duration(std::string light, double s, std::uint64_t seq, double ts)
{
  return RsuMessage{MessageKind::NextDuration, std::move(light), std::nullopt, s, seq, ts};
}

RsuMessage RsuMessage::heartbeat(std::string light, std::uint64_t seq, double ts)
{
  return RsuMessage{MessageKind::Heartbeat, std::move(light), std::nullopt, std::nullopt, seq, ts};
}

namespace
{

void validate(const RsuMessage& m)
{
  const bool wants_color = m.kind == MessageKind::StateChange;
  const bool wants_seconds = m.kind == MessageKind::TimeLeft || m.kind == MessageKind::NextDuration;
  if (wants_color != m.color.has_value())
    throw InvalidInput("color present/absent mismatch for " + std::string(to_string(m.kind)));
  if (wants_seconds != m.seconds.has_value())
    throw InvalidInput("seconds present/absent mismatch for " + std::string(to_string(m.kind)));
  if (m.seconds && (!std::isfinite(*m.seconds) || *m.seconds < 0.0))
    throw InvalidInput("seconds must be finite and non-negative");
  if (!std::isfinite(m.timestamp))
    throw InvalidInput("timestamp must be finite");
}

json parse_object(std::string_view line)
{
  if (!line.empty() && line.back() == '\n')
    line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r')
    line.remove_suffix(1);
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw InvalidInput("not a JSON object: " + std::string(line));
  return j;
}

RsuMessage message_from_json(const json& j)
{
  try
  {
    RsuMessage m;
    m.kind = parse_message_kind(j.at("kind").get<std::string>());
    m.light_id = j.at("light_id").get<std::string>();
    if (j.contains("color"))
      m.color = parse_phase_color(j.at("color").get<std::string>());
    if (j.contains("seconds"))
      m.seconds = j.at("seconds").get<double>();
    const auto& seq = j.at("seq");
    if (!seq.is_number_unsigned())
      throw InvalidInput("seq must be a non-negative integer");
    m.seq = seq.get<std::uint64_t>();
    m.timestamp = j.at("ts").get<double>();
    for (const auto& [key, _] : j.items())
    {
      if (key != "kind" && key != "light_id" && key != "color" && key != "seconds" && key != "seq" && key != "ts")
        throw InvalidInput("unexpected field '" + key + "'");
    }
    validate(m);
    return m;
  }
  catch (const json::exception& e)
  {
    throw InvalidInput(std::string("malformed message: ") + e.what());
  }
}

}  // namespace

std::string encode_message(const RsuMessage& m)
{
  validate(m);
  // ordered_json keeps the documented field order on the wire.
  nlohmann::ordered_json j;
  j["kind"] = to_string(m.kind);
  j["light_id"] = m.light_id;
  if (m.color)
    j["color"] = to_string(*m.color);
  if (m.seconds)
    j["seconds"] = *m.seconds;
  j["seq"] = m.seq;
  j["ts"] = m.timestamp;
  return j.dump() + "\n";
}

RsuMessage decode_message(std::string_view line)
{
  return message_from_json(parse_object(line));
}

std::string encode_subscribe(const SubscribeRequest& r)
{
  nlohmann::ordered_json j;
  j["kind"] = "subscribe";
  j["light_ids"] = r.light_ids;
  j["client_id"] = r.client_id;
  return j.dump() + "\n";
}

SubscribeRequest decode_subscribe(std::string_view line)
{
  const json j = parse_object(line);
  try
  {
    if (j.at("kind").get<std::string>() != "subscribe")
      throw InvalidInput("expected a subscribe request");
    SubscribeRequest r;
    r.client_id = j.at("client_id").get<std::string>();
    r.light_ids = j.at("light_ids").get<std::vector<std::string>>();
    if (r.light_ids.empty())
      throw InvalidInput("subscribe needs at least one light id");
    return r;
  }
  catch (const json::exception& e)
  {
    throw InvalidInput(std::string("malformed subscribe: ") + e.what());
  }
}

std::string encode_error(std::string_view what)
{
  nlohmann::ordered_json j;
  j["kind"] = "error";
  j["message"] = std::string(what);
  return j.dump() + "\n";
}

ServerLine decode_server_line(std::string_view line)
{
  const json j = parse_object(line);
  if (j.contains("kind") && j["kind"] == "error")
    return ServerLine{std::nullopt, j.value("message", std::string{})};
  return ServerLine{message_from_json(j), std::nullopt};
}

}  // namespace glosa
