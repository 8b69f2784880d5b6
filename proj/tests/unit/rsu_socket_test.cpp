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

#include <chrono>

#include <gtest/gtest.h>

#include "glosa/error.hpp"
#include "glosa/rsu_service.hpp"

namespace glosa
{
namespace
{

using namespace std::chrono_literals;

RsuConfig config(double offset = 0.0)
{
  RsuConfig c;
  c.port = 0;
  c.time_offset_s = offset;
  c.lights = {{"L1", PhaseSchedule({{PhaseColor::Green, 40}, {PhaseColor::Red, 10}})},
              {"L2", PhaseSchedule({{PhaseColor::Red, 25}, {PhaseColor::Green, 25}})}};
  return c;
}

std::vector<RsuMessage> collect(RsuClient& c, std::size_t want, std::chrono::milliseconds budget = 3000ms)
{
  std::vector<RsuMessage> out;
  const auto deadline = std::chrono::steady_clock::now() + budget;
  while (out.size() < want && std::chrono::steady_clock::now() < deadline)
  {
    for (auto& r : c.poll(50ms))
      out.push_back(r.message);
  }
  return out;
}

TEST(RsuServer, SubscribeMidRedGetsSnapshot)
{
  RsuServer server(config(45.0));
  server.start();
  RsuClient client("127.0.0.1", server.port(), {"car", {"L1"}});
  const auto msgs = collect(client, 3);
  ASSERT_GE(msgs.size(), 3u);
  EXPECT_EQ(msgs[0].kind, MessageKind::TimeLeft);
  EXPECT_NEAR(*msgs[0].seconds, 5.0, 0.2);
  EXPECT_EQ(msgs[1].kind, MessageKind::NextDuration);
  EXPECT_DOUBLE_EQ(*msgs[1].seconds, 40.0);
  EXPECT_EQ(msgs[2].kind, MessageKind::StateChange);
  EXPECT_EQ(*msgs[2].color, PhaseColor::Red);
  server.stop();
}

TEST(RsuServer, UnknownLightGetsErrorAndClose)
{
  RsuServer server(config());
  server.start();
  RsuClient client("127.0.0.1", server.port(), {"car", {"nope"}});
  const auto deadline = std::chrono::steady_clock::now() + 3s;
  while (client.open() && std::chrono::steady_clock::now() < deadline)
    client.poll(50ms);
  EXPECT_FALSE(client.open());
  ASSERT_TRUE(client.error().has_value());
  EXPECT_NE(client.error()->find("nope"), std::string::npos);
  server.stop();
}

TEST(RsuServer, PortInUseFails)
{
  RsuServer first(config());
  first.start();
  RsuConfig c = config();
  c.port = first.port();
  RsuServer second(c);
  EXPECT_THROW(second.start(), TransportError);
  first.stop();
}

TEST(RsuServer, TwoLightsInterleave)
{
  RsuConfig c = config();
  c.time_scale = 20.0;
  RsuServer server(c);
  server.start();
  RsuClient client("127.0.0.1", server.port(), {"car", {"L1", "L2"}});
  const auto msgs = collect(client, 60);
  std::map<std::string, std::uint64_t> last_time_left;
  std::size_t l1 = 0;
  std::size_t l2 = 0;
  for (const auto& m : msgs)
  {
    (m.light_id == "L1" ? l1 : l2) += 1;
    if (m.kind == MessageKind::TimeLeft)
    {
      EXPECT_GT(m.seq, last_time_left[m.light_id]);
      last_time_left[m.light_id] = m.seq;
    }
  }
  EXPECT_GT(l1, 10u);
  EXPECT_GT(l2, 10u);
  server.stop();
}

TEST(RsuServer, StopIsIdempotent)
{
  RsuServer server(config());
  server.start();
  EXPECT_TRUE(server.running());
  server.stop();
  server.stop();
  EXPECT_FALSE(server.running());
}

TEST(ParseAddress, Splits)
{
  EXPECT_EQ(parse_address("127.0.0.1:7070"), (std::pair<std::string, std::uint16_t>{"127.0.0.1", 7070}));
  EXPECT_THROW(parse_address("nohost"), InvalidInput);
  EXPECT_THROW(parse_address("h:99999"), InvalidInput);
}

}  // namespace
}  // namespace glosa
