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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glosa/signal_phase.hpp"

namespace glosa
{

enum class MessageKind
{
  StateChange,
  TimeLeft,
  NextDuration,
  Heartbeat,
};

std::string_view to_string(MessageKind k);
MessageKind parse_message_kind(std::string_view s);

/// One line of the RSU stream. `color` is set only for StateChange, `seconds` only
/// for TimeLeft and NextDuration.
struct RsuMessage
{
  MessageKind kind = MessageKind::Heartbeat;
  std::string light_id;
  std::optional<PhaseColor> color;
  std::optional<double> seconds;
  std::uint64_t seq = 0;
  double timestamp = 0.0;

  static RsuMessage state_change(std::string light, PhaseColor c, std::uint64_t seq, double ts);
  static RsuMessage time_left(std::string light, double s, std::uint64_t seq, double ts);
  static RsuMessage next_duration(std::string light, double s, std::uint64_t seq, double ts);
  static RsuMessage heartbeat(std::string light, std::uint64_t seq, double ts);

  friend bool operator==(const RsuMessage&, const RsuMessage&) = default;
};

/// Single-line JSON terminated by '\n'.
std::string encode_message(const RsuMessage& m);
/// Accepts a line with or without the trailing newline. Throws InvalidInput on
/// malformed or inconsistent input.
RsuMessage decode_message(std::string_view line);

struct SubscribeRequest
{
  std::string client_id;
  std::vector<std::string> light_ids;
};

std::string encode_subscribe(const SubscribeRequest& r);
SubscribeRequest decode_subscribe(std::string_view line);
std::string encode_error(std::string_view what);

/// A line from the server is either a stream message or an error reply.
struct ServerLine
{
  std::optional<RsuMessage> message;
  std::optional<std::string> error;
};
ServerLine decode_server_line(std::string_view line);

}  // namespace glosa
