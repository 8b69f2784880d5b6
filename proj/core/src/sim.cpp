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

#include "glosa/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "glosa/error.hpp"

namespace glosa
{

std::string_view to_string(EventKind k)
{
  switch (k)
  {
    case EventKind::Released:
      return "released";
    case EventKind::Decision:
      return "decision";
    case EventKind::Arrival:
      return "arrival";
    case EventKind::Cleared:
      return "cleared";
    case EventKind::LostConnection:
      return "lost_connection";
    case EventKind::RegainedConnection:
      return "regained_connection";
    case EventKind::FaultDisconnect:
      return "fault_disconnect";
    case EventKind::FaultConnect:
      return "fault_connect";
    case EventKind::StaleMessage:
      return "stale_message";
    case EventKind::Finished:
      return "finished";
  }
  return "?";
}

const VehicleSummary& RunResult::vehicle(const std::string& id) const
{
  for (const auto& v : vehicles)
  {
    if (v.id == id)
      return v;
  }
  throw InvalidInput("no vehicle '" + id + "' in run");
}

std::vector<TelemetryRecord> RunResult::trace(const std::string& vehicle_id) const
{
  std::vector<TelemetryRecord> out;
  for (const auto& r : telemetry)
  {
    if (r.vehicle_id == vehicle_id)
      out.push_back(r);
  }
  return out;
}

bool in_zone(const VehicleSummary& v, double arc_m)
{
  for (const auto& [b, e] : v.zones)
  {
    if (b <= e ? (arc_m >= b && arc_m < e) : (arc_m >= b || arc_m < e))
      return true;
  }
  return false;
}

std::vector<TelemetryRecord> safety_violations(const RunResult& r)
{
  std::map<std::string, const VehicleSummary*> by_id;
  for (const auto& v : r.vehicles)
    by_id[v.id] = &v;
  std::vector<TelemetryRecord> out;
  for (const auto& row : r.telemetry)
  {
    const auto it = by_id.find(row.vehicle_id);
    if (it != by_id.end() && row.light == PhaseColor::Red && in_zone(*it->second, row.arc_m))
      out.push_back(row);
  }
  return out;
}

namespace
{

constexpr double kEps = 1e-9;

/// In-process link with a fixed delay on the simulation clock. While down, deliver()
/// fails so the broadcaster drops the session.
class LoopbackLink : public MessageSink
{
public:
  LoopbackLink(const double* clock, double delay) : clock_(clock), delay_(delay) {}

  bool deliver(const RsuMessage& m) override
  {
    if (!up_)
      return false;
    queue_.push_back({*clock_ + delay_, m});
    return true;
  }

  std::vector<RsuMessage> due(double now)
  {
    std::vector<RsuMessage> out;
    while (!queue_.empty() && queue_.front().first <= now + kEps)
    {
      out.push_back(std::move(queue_.front().second));
      queue_.pop_front();
    }
    return out;
  }

  void set_up(bool up)
  {
    up_ = up;
    if (!up)
      queue_.clear();
  }
  bool up() const { return up_; }

private:
  const double* clock_;
  double delay_;
  bool up_ = true;
  std::deque<std::pair<double, RsuMessage>> queue_;
};

struct SimVehicle
{
  const VehicleSpec* spec = nullptr;
  const WaypointCourse* course = nullptr;
  const PhaseSchedule* schedule = nullptr;
  std::string light_id;
  std::unique_ptr<VehicleAgent> agent;
  std::vector<double> stop_lines;  // arc of each zone entry, in [0, L)
  std::vector<double> exit_lines;  // arc of each zone exit, in [0, L)
  std::vector<std::size_t> intersections;
  std::size_t designated_intersection = 0;
  std::size_t designated_clearances = 0;
  bool subscribes = false;
  std::shared_ptr<LoopbackLink> link;
  std::unique_ptr<RsuClient> client;
  VehicleSummary summary;
};

double wrap(double x, double L)
{
  double r = std::fmod(x, L);
  if (r < 0.0)
    r += L;
  return r;
}

ApproachView approach_view(const SimVehicle& v, double now)
{
  const double L = v.course->loop_length();
  const double arc = v.agent->state().arc_position;
  double best = std::numeric_limits<double>::infinity();
  for (double s : v.stop_lines)
  {
    double d = wrap(s - arc, L);
    if (d <= kEps)
      d += L;
    best = std::min(best, d);
  }
  const PhaseSnapshot snap = v.schedule->snapshot_at(now);
  return ApproachView{best, snap.color, snap.time_remaining_s};
}

TelemetryRecord record(const SimVehicle& v, double t)
{
  const VehicleState& s = v.agent->state();
  return TelemetryRecord{t,
                         v.spec->id,
                         s.arc_position,
                         s.velocity,
                         s.acceleration,
                         v.schedule->snapshot_at(t).color,
                         s.connected,
                         s.target_velocity};
}

class Engine
{
public:
  Engine(const ScenarioConfig& cfg, const RunOptions& opts) : cfg_(cfg), opts_(opts) {}

  RunResult run()
  {
    cfg_.validate();
    const bool socket = cfg_.transport.mode == TransportMode::Socket;
    setup(socket);

    const double dt = cfg_.tick_s;
    const double limit = time_limit();
    const VehicleSpec& designated = cfg_.designated_vehicle();
    SimVehicle* dv = find(designated.id);

    result_.scenario_id = cfg_.id;
    result_.label = cfg_.label;
    result_.fingerprint = cfg_.fingerprint();
    result_.designated_vehicle = designated.id;
    result_.designated_kind = designated.controller.kind;
    result_.tick_s = dt;

    if (socket)
      connect_socket_clients();

    std::size_t fault_i = 0;
    for (std::uint64_t k = 0;; ++k)
    {
      now_ = origin_ + static_cast<double>(k) * dt;
      if (now_ - origin_ > limit + kEps)
      {
        for (auto& v : vehicles_)
        {
          if (!v.agent->released())
            throw RunError("vehicle '" + v.spec->id + "' was never released: its light never turned green");
        }
        throw RunError("run did not finish within " + std::to_string(limit) + " s");
      }

      if (socket)
        pump_socket(k);
      else
        pump_loopback(k);

      while (fault_i < cfg_.faults.size() && cfg_.faults[fault_i].t <= now_ - origin_ + kEps)
        apply_fault(cfg_.faults[fault_i++], socket);

      for (auto& v : vehicles_)
      {
        if (!v.agent->released() && v.schedule->snapshot_at(now_).color == PhaseColor::Green)
        {
          v.agent->release(now_);
          v.summary.release_t = now_;
          event(v, EventKind::Released);
        }
      }

      for (auto& v : vehicles_)
      {
        const TickReport rep = v.agent->prepare(approach_view(v, now_), now_, dt);
        if (rep.lost_connection)
          event(v, EventKind::LostConnection);
        if (rep.regained_connection)
          event(v, EventKind::RegainedConnection);
        if (rep.decision)
        {
          RunEvent e{now_, v.spec->id, EventKind::Decision, rep.decision, 0, rep.command};
          result_.events.push_back(std::move(e));
        }
        result_.telemetry.push_back(record(v, now_));
      }

      bool done = false;
      for (auto& v : vehicles_)
      {
        const double L = v.course->loop_length();
        const VehicleState before = v.agent->state();
        v.agent->advance(dt);
        const VehicleState& after = v.agent->state();
        const double u0 = static_cast<double>(before.lap_count) * L + before.arc_position;
        const double u1 = static_cast<double>(after.lap_count) * L + after.arc_position;
        if (u1 <= u0)
          continue;
        // Smallest occurrence of a line strictly after u0, if reached by u1.
        const auto crossed = [&](double line_arc) -> std::optional<double> {
          double line = std::floor(u0 / L) * L + line_arc;
          if (line <= u0)
            line += L;
          if (line > u1)
            return std::nullopt;
          return now_ + dt * (line - u0) / (u1 - u0);
        };
        for (std::size_t i = 0; i < v.stop_lines.size(); ++i)
        {
          if (const auto t_cross = crossed(v.stop_lines[i]))
          {
            result_.events.push_back(
              RunEvent{*t_cross, v.spec->id, EventKind::Arrival, std::nullopt, v.intersections[i], after.velocity});
            ++v.summary.crossings;
            if (!v.summary.first_crossing_t)
              v.summary.first_crossing_t = *t_cross;
          }
          if (const auto t_exit = crossed(v.exit_lines[i]))
          {
            result_.events.push_back(
              RunEvent{*t_exit, v.spec->id, EventKind::Cleared, std::nullopt, v.intersections[i], after.velocity});
            ++v.summary.clearances;
            if (v.intersections[i] == v.designated_intersection)
            {
              ++v.designated_clearances;
              if (&v == dv && v.designated_clearances >= static_cast<std::size_t>(cfg_.laps))
                done = true;
            }
          }
        }
      }

      if (done)
      {
        const double end = now_ + dt;
        for (auto& v : vehicles_)
          result_.telemetry.push_back(record(v, end));
        result_.end_t = end;
        result_.events.push_back(RunEvent{end, dv->spec->id, EventKind::Finished, std::nullopt, 0, 0.0});
        break;
      }
    }

    for (auto& v : vehicles_)
    {
      if (v.client)
      {
        if (v.client->error())
          ++result_.protocol_errors;
        v.client->close();
      }
      result_.vehicles.push_back(v.summary);
    }
    std::stable_sort(result_.events.begin(), result_.events.end(),
                     [](const RunEvent& a, const RunEvent& b) { return a.t < b.t; });
    result_.safety_violations = safety_violations(result_).size();
    return std::move(result_);
  }

private:
  void setup(bool socket)
  {
    std::mt19937_64 rng(cfg_.seed);
    std::uniform_real_distribution<double> jitter(0.0, cfg_.reaction_jitter_s);
    if (!socket)
      broadcaster_ = std::make_unique<RsuBroadcaster>(cfg_.lights, cfg_.cadence, 0.0);

    vehicles_.reserve(cfg_.vehicles.size());
    for (const auto& spec : cfg_.vehicles)
    {
      SimVehicle v;
      v.spec = &spec;
      v.course = &cfg_.course(spec.course_id).course;
      v.light_id = cfg_.light_for_course(spec.course_id);
      v.schedule = &cfg_.light(v.light_id).schedule;
      const double L = v.course->loop_length();
      const double half = spec.controller.intersection_clear_length / 2.0;
      for (std::size_t idx : v.course->intersection_indices())
      {
        const double centre = v.course->cumulative_arc(idx);
        v.intersections.push_back(idx);
        v.stop_lines.push_back(wrap(centre - half, L));
        v.exit_lines.push_back(wrap(centre + half, L));
        v.summary.zones.emplace_back(wrap(centre - half, L), wrap(centre + half, L));
      }
      v.designated_intersection = v.intersections.front();

      double reaction = spec.controller.reaction_delay_s;
      if (spec.controller.kind == ControllerKind::Human && cfg_.reaction_jitter_s > 0.0)
        reaction += jitter(rng);
      v.agent = std::make_unique<VehicleAgent>(spec.id, spec.controller, spec.start_arc_m, L,
                                               cfg_.cadence.heartbeat_timeout_s, reaction);
      v.subscribes = spec.controller.kind != ControllerKind::Human;

      v.summary.id = spec.id;
      v.summary.kind = spec.controller.kind;
      v.summary.course_id = spec.course_id;
      v.summary.light_id = v.light_id;
      v.summary.loop_length_m = L;
      vehicles_.push_back(std::move(v));
    }

    if (!socket)
    {
      for (auto& v : vehicles_)
      {
        if (!v.subscribes)
          continue;
        v.link = std::make_shared<LoopbackLink>(&now_, cfg_.transport.delay_s);
        broadcaster_->subscribe(SubscribeRequest{v.spec->id, {v.light_id}}, v.link, 0.0);
      }
    }
  }

  double time_limit() const
  {
    if (cfg_.max_time_s > 0.0)
      return cfg_.max_time_s;
    double longest = 0.0;
    double min_speed = std::numeric_limits<double>::infinity();
    for (const auto& v : vehicles_)
    {
      longest = std::max(longest, v.course->loop_length());
      min_speed = std::min(min_speed, v.spec->controller.v_min);
    }
    double cycle = 0.0;
    for (const auto& l : cfg_.lights)
      cycle = std::max(cycle, l.schedule.cycle_length());
    return static_cast<double>(cfg_.laps + 1) * longest / min_speed + cycle;
  }

  SimVehicle* find(const std::string& id)
  {
    for (auto& v : vehicles_)
    {
      if (v.spec->id == id)
        return &v;
    }
    return nullptr;
  }

  void event(const SimVehicle& v, EventKind kind)
  {
    result_.events.push_back(RunEvent{now_, v.spec->id, kind, std::nullopt, 0, 0.0});
  }

  void deliver(SimVehicle& v, const RsuMessage& m)
  {
    if (!v.agent->receive(m, now_))
      event(v, EventKind::StaleMessage);
  }

  void pump_loopback(std::uint64_t k)
  {
    if (k > 0)
      broadcaster_->broadcast_tick(now_);
    for (auto& v : vehicles_)
    {
      if (!v.link)
        continue;
      for (const auto& m : v.link->due(now_))
        deliver(v, m);
    }
  }

  void apply_fault(const FaultEvent& f, bool socket)
  {
    SimVehicle* v = find(f.vehicle_id);
    if (v == nullptr || !v->subscribes)
      return;
    event(*v, f.connect ? EventKind::FaultConnect : EventKind::FaultDisconnect);
    if (socket)
    {
      if (f.connect && !v->client)
        open_client(*v);
      else if (!f.connect && v->client)
      {
        v->client->close();
        v->client.reset();
      }
      return;
    }
    if (f.connect)
    {
      if (v->link->up())
        return;
      v->link->set_up(true);
      broadcaster_->subscribe(SubscribeRequest{v->spec->id, {v->light_id}}, v->link, now_);
      for (const auto& m : v->link->due(now_))
        deliver(*v, m);
    }
    else
    {
      v->link->set_up(false);
      broadcaster_->unsubscribe(v->spec->id, v->link.get());
    }
  }

  // ---- socket transport ----

  void open_client(SimVehicle& v)
  {
    const auto [host, port] = parse_address(cfg_.transport.rsu_address);
    try
    {
      v.client = std::make_unique<RsuClient>(host, port, SubscribeRequest{v.spec->id, {v.light_id}});
    }
    catch (const TransportError& e)
    {
      throw RunError(std::string("cannot reach the RSU service: ") + e.what());
    }
  }

  void connect_socket_clients()
  {
    bool any = false;
    for (auto& v : vehicles_)
    {
      if (!v.subscribes)
        continue;
      open_client(v);
      any = true;
    }
    wall0_ = std::chrono::steady_clock::now();
    if (!any)
      return;

    // The first message fixes the mapping from service time to the simulation clock.
    const auto deadline = wall0_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                     std::chrono::duration<double>(opts_.connect_timeout_s));
    while (std::chrono::steady_clock::now() < deadline)
    {
      for (auto& v : vehicles_)
      {
        if (!v.client)
          continue;
        if (v.client->error())
          throw RunError("RSU service rejected the subscription: " + *v.client->error());
        auto got = v.client->poll(std::chrono::milliseconds(10));
        if (!got.empty())
        {
          origin_ = got.front().message.timestamp;
          wall0_ = got.front().at;
          for (const auto& r : got)
            pending_[v.spec->id].push_back(r.message);
          return;
        }
      }
    }
    throw RunError("RSU service sent nothing within the connect timeout");
  }

  void pump_socket(std::uint64_t k)
  {
    const double scale = cfg_.transport.time_scale;
    const auto target = wall0_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(static_cast<double>(k) * cfg_.tick_s / scale));
    std::this_thread::sleep_until(target);
    for (auto& v : vehicles_)
    {
      if (!v.client)
        continue;
      auto& queue = pending_[v.spec->id];
      for (const auto& m : queue)
        deliver(v, m);
      queue.clear();
      for (const auto& r : v.client->poll(std::chrono::milliseconds(0)))
        deliver(v, r.message);
      if (v.client->error())
      {
        ++result_.protocol_errors;
        v.client->close();
        v.client.reset();
      }
    }
  }

  const ScenarioConfig& cfg_;
  RunOptions opts_;
  std::vector<SimVehicle> vehicles_;
  std::unique_ptr<RsuBroadcaster> broadcaster_;
  std::map<std::string, std::vector<RsuMessage>> pending_;
  std::chrono::steady_clock::time_point wall0_;
  double origin_ = 0.0;
  double now_ = 0.0;
  RunResult result_;
};

std::string fmt6(double v)
{
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line)
{
  std::vector<std::string> out;
  std::string cur;
  for (char c : line)
  {
    if (c == ',')
    {
      out.push_back(std::move(cur));
      cur.clear();
    }
    else if (c != '\r')
      cur.push_back(c);
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string& s, std::size_t line_no)
{
  try
  {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size())
      throw std::invalid_argument(s);
    return v;
  }
  catch (const std::exception&)
  {
    throw LoadError("telemetry line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

const char* kTelemetryHeader = "t,vehicle_id,arc_m,v_mps,a_mps2,light,connected,target_mps";

}  // namespace

RunResult run(const ScenarioConfig& config, const RunOptions& options)
{
  Engine engine(config, options);
  return engine.run();
}

void write_telemetry_csv(std::ostream& out, const std::vector<TelemetryRecord>& rows)
{
  out << kTelemetryHeader << '\n';
  for (const auto& r : rows)
  {
    out << fmt6(r.t) << ',' << r.vehicle_id << ',' << fmt6(r.arc_m) << ',' << fmt6(r.v_mps) << ',' << fmt6(r.a_mps2)
        << ',' << to_string(r.light) << ',' << (r.connected ? 1 : 0) << ',' << fmt6(r.target_mps) << '\n';
  }
}

std::vector<TelemetryRecord> read_telemetry_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line))
    throw LoadError("telemetry is empty");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  if (line != kTelemetryHeader)
    throw LoadError("telemetry header mismatch: '" + line + "'");
  std::vector<TelemetryRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line))
  {
    ++line_no;
    if (line.empty())
      continue;
    const auto f = split_csv(line);
    if (f.size() != 8)
      throw LoadError("telemetry line " + std::to_string(line_no) + ": expected 8 fields");
    TelemetryRecord r;
    r.t = parse_double(f[0], line_no);
    r.vehicle_id = f[1];
    r.arc_m = parse_double(f[2], line_no);
    r.v_mps = parse_double(f[3], line_no);
    r.a_mps2 = parse_double(f[4], line_no);
    try
    {
      r.light = parse_phase_color(f[5]);
    }
    catch (const InvalidInput& e)
    {
      throw LoadError("telemetry line " + std::to_string(line_no) + ": " + e.what());
    }
    if (f[6] != "0" && f[6] != "1")
      throw LoadError("telemetry line " + std::to_string(line_no) + ": connected must be 0 or 1");
    r.connected = f[6] == "1";
    r.target_mps = parse_double(f[7], line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_events_csv(std::ostream& out, const std::vector<RunEvent>& events)
{
  out << "t,vehicle_id,event,rule,target_mps,average_mps,delta_x_m,delta_t_s,intersection,command_mps\n";
  for (const auto& e : events)
  {
    out << fmt6(e.t) << ',' << e.vehicle_id << ',' << to_string(e.kind) << ',';
    if (e.decision)
    {
      const Decision& d = *e.decision;
      const auto num = [](double v) { return std::isfinite(v) ? fmt6(v) : std::string(); };
      out << to_string(d.rule) << ',' << num(d.target) << ',' << num(d.average_velocity) << ',' << num(d.delta_x)
          << ',' << num(d.delta_t);
    }
    else
      out << ",,,,";
    out << ',';
    if (e.kind == EventKind::Arrival || e.kind == EventKind::Cleared)
      out << e.intersection;
    out << ',' << fmt6(e.command) << '\n';
  }
}

void write_run(const RunResult& r, const std::filesystem::path& dir)
{
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "telemetry.csv", std::ios::binary);
    if (!out)
      throw RunError("cannot write " + (dir / "telemetry.csv").string());
    write_telemetry_csv(out, r.telemetry);
  }
  {
    std::ofstream out(dir / "events.csv", std::ios::binary);
    write_events_csv(out, r.events);
  }
  const VehicleSummary& dv = r.vehicle(r.designated_vehicle);
  nlohmann::ordered_json j;
  j["scenario_id"] = r.scenario_id;
  j["label"] = r.label;
  j["fingerprint"] = r.fingerprint;
  j["designated_vehicle"] = r.designated_vehicle;
  j["controller"] = std::string(to_string(r.designated_kind));
  j["tick_s"] = r.tick_s;
  j["end_t"] = r.end_t;
  j["release_t"] = dv.release_t ? nlohmann::ordered_json(*dv.release_t) : nlohmann::ordered_json();
  j["first_crossing_t"] = dv.first_crossing_t ? nlohmann::ordered_json(*dv.first_crossing_t) : nlohmann::ordered_json();
  j["averages_from"] = "release";
  j["safety_violations"] = r.safety_violations;
  j["protocol_errors"] = r.protocol_errors;
  std::ofstream out(dir / "run.json", std::ios::binary);
  out << j.dump(2) << '\n';
}

StoredRun read_run(const std::filesystem::path& dir)
{
  StoredRun s;
  s.dir = dir;
  std::ifstream meta(dir / "run.json");
  if (!meta)
    throw LoadError("missing run.json in " + dir.string());
  nlohmann::json j;
  try
  {
    meta >> j;
    s.scenario_id = j.at("scenario_id").get<std::string>();
    s.label = j.at("label").get<std::string>();
    s.fingerprint = j.at("fingerprint").get<std::string>();
    s.designated_vehicle = j.at("designated_vehicle").get<std::string>();
    s.controller = parse_controller_kind(j.at("controller").get<std::string>());
    s.tick_s = j.at("tick_s").get<double>();
    s.end_t = j.at("end_t").get<double>();
    if (j.contains("release_t") && !j["release_t"].is_null())
      s.release_t = j["release_t"].get<double>();
    if (j.contains("first_crossing_t") && !j["first_crossing_t"].is_null())
      s.first_crossing_t = j["first_crossing_t"].get<double>();
  }
  catch (const nlohmann::json::exception& e)
  {
    throw LoadError(dir.string() + "/run.json: " + e.what());
  }
  std::ifstream tel(dir / "telemetry.csv");
  if (!tel)
    throw LoadError("missing telemetry.csv in " + dir.string());
  s.telemetry = read_telemetry_csv(tel);
  return s;
}

}  // namespace glosa
