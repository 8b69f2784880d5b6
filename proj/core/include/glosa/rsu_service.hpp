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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "glosa/rsu_protocol.hpp"
#include "glosa/signal_phase.hpp"

namespace glosa
{

struct LightDefinition
{
  std::string id;
  PhaseSchedule schedule;
};

struct RsuCadence
{
  double publish_period_s = 0.1;    // TimeLeft / NextDuration, 10 Hz
  double heartbeat_period_s = 0.5;  // 2 Hz
  double heartbeat_timeout_s = 1.5;
};

/// Anything the broadcaster can push a message into. deliver() returns false when the
/// peer is gone; the broadcaster then drops the session.
class MessageSink
{
public:
  virtual ~MessageSink() = default;
  virtual bool deliver(const RsuMessage& m) = 0;
};

struct Delivery
{
  std::string client_id;
  RsuMessage message;
};

struct ClientSession
{
  std::string client_id;
  std::set<std::string> subscribed_lights;
  double last_seen = 0.0;
  std::shared_ptr<MessageSink> sink;
};

/// Phase scheduler and fan-out for a set of lights.
///
/// The broadcaster owns the sequence counters, one per (light, kind) stream, so every
/// subscriber of a light sees the same seq for the same message. Sessions are guarded
/// by a mutex; message construction holds no lock.
class RsuBroadcaster
{
public:
  RsuBroadcaster(std::vector<LightDefinition> lights, RsuCadence cadence, double start_time);

  /// Opens (or replaces) a session and immediately sends TimeLeft, NextDuration and
  /// StateChange for every requested light. Throws InvalidInput for an unknown light.
  std::vector<RsuMessage> subscribe(const SubscribeRequest& req, std::shared_ptr<MessageSink> sink, double now);
  /// Drops the session. With `sink` set, only if the session still belongs to that sink.
  void unsubscribe(const std::string& client_id, const MessageSink* sink = nullptr);

  /// Emits everything due in (last tick, now]: per phase change a TimeLeft and
  /// NextDuration stamped at the transition followed by one StateChange, periodic TimeLeft and
  /// NextDuration, and periodic Heartbeat. Returns what was actually delivered.
  std::vector<Delivery> broadcast_tick(double now);

  bool has_light(const std::string& id) const { return lights_.contains(id); }
  const PhaseSchedule& schedule(const std::string& id) const { return lights_.at(id); }
  const RsuCadence& cadence() const { return cadence_; }
  double last_tick() const { return last_tick_; }
  std::size_t session_count() const;
  std::vector<std::string> session_ids() const;

private:
  std::uint64_t next_seq(const std::string& light, MessageKind kind);
  std::vector<RsuMessage> snapshot_messages(const std::string& light, double now);

  std::map<std::string, PhaseSchedule> lights_;
  RsuCadence cadence_;
  double start_time_;
  double last_tick_;
  std::uint64_t publish_count_ = 0;
  std::uint64_t heartbeat_count_ = 0;
  std::map<std::pair<std::string, MessageKind>, std::uint64_t> seq_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, ClientSession> sessions_;
};

struct RsuConfig
{
  std::string host = "127.0.0.1";
  std::uint16_t port = 7070;
  std::vector<LightDefinition> lights;
  RsuCadence cadence;
  /// Service clock at startup, in schedule seconds.
  double time_offset_s = 0.0;
  /// Schedule seconds per wall-clock second.
  double time_scale = 1.0;
  /// Outbound bytes a session may have queued before it is dropped as too slow.
  std::size_t max_backlog_bytes = 1 << 20;
};

RsuConfig load_rsu_config(const std::filesystem::path& file);
RsuConfig parse_rsu_config(const std::string& yaml_text);
/// "host:port" -> pair. Throws InvalidInput.
std::pair<std::string, std::uint16_t> parse_address(const std::string& addr);

/// Newline-delimited JSON service over TCP.
///
/// One thread runs a poll loop: it accepts connections, reads subscribe lines, advances
/// the broadcaster on the scaled wall clock and flushes per-session output buffers with
/// non-blocking writes, so a stalled client only grows its own buffer.
class RsuServer
{
public:
  explicit RsuServer(RsuConfig config);
  ~RsuServer();
  RsuServer(const RsuServer&) = delete;
  RsuServer& operator=(const RsuServer&) = delete;

  /// Binds and starts the service thread. Throws TransportError when the port is taken.
  void start();
  /// Closes every session and joins the service thread. Idempotent.
  void stop();

  std::uint16_t port() const { return bound_port_; }
  bool running() const { return running_.load(); }
  double now() const;
  std::size_t session_count() const;

private:
  struct Connection;
  void loop();

  RsuConfig config_;
  std::unique_ptr<RsuBroadcaster> broadcaster_;
  int listen_fd_ = -1;
  std::uint16_t bound_port_ = 0;
  std::chrono::steady_clock::time_point started_;
  std::atomic<bool> running_{false};
  std::atomic<bool> stop_requested_{false};
  std::thread thread_;
  std::vector<std::shared_ptr<Connection>> connections_;
};

/// Blocking TCP client. A reader thread parses lines into a queue that the owner drains.
class RsuClient
{
public:
  RsuClient(const std::string& host, std::uint16_t port, SubscribeRequest request);
  ~RsuClient();
  RsuClient(const RsuClient&) = delete;
  RsuClient& operator=(const RsuClient&) = delete;

  struct Received
  {
    RsuMessage message;
    std::chrono::steady_clock::time_point at;
  };

  /// Waits up to `timeout` for at least one message, then returns everything queued.
  std::vector<Received> poll(std::chrono::milliseconds timeout);
  /// Error reply from the server, if one arrived.
  std::optional<std::string> error() const;
  /// False once the server closed the stream or the socket failed.
  bool open() const { return open_.load(); }
  void close();

private:
  void read_loop();

  int fd_ = -1;
  std::atomic<bool> open_{false};
  std::thread reader_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Received> queue_;
  std::optional<std::string> error_;
};

}  // namespace glosa
