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

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "glosa/error.hpp"
#include "glosa/rsu_protocol.hpp"
#include "glosa/rsu_service.hpp"

namespace
{

std::atomic<bool> g_stop{false};

void on_signal(int)
{
  g_stop = true;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Roadside unit light-state service"};
  app.require_subcommand(1);

  std::string config_file;
  std::string listen;
  double duration = 0.0;
  auto* serve = app.add_subcommand("serve", "Publish light state to subscribers");
  serve->add_option("--config", config_file, "Service YAML")->required()->check(CLI::ExistingFile);
  serve->add_option("--listen", listen, "Override host:port");
  serve->add_option("--duration", duration, "Stop after this many wall seconds (0 runs until signalled)");

  std::string address = "127.0.0.1:7070";
  std::vector<std::string> lights;
  std::string client_id = "mirror";
  double mirror_for = 0.0;
  auto* mirror = app.add_subcommand("mirror", "Subscribe and print the stream");
  mirror->add_option("--connect", address, "Service host:port");
  mirror->add_option("--light", lights, "Light id (repeatable)")->required();
  mirror->add_option("--client-id", client_id, "Client id");
  mirror->add_option("--duration", mirror_for, "Stop after this many seconds (0 runs until closed)");

  CLI11_PARSE(app, argc, argv);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  try
  {
    if (*serve)
    {
      glosa::RsuConfig cfg = glosa::load_rsu_config(config_file);
      if (!listen.empty())
        std::tie(cfg.host, cfg.port) = glosa::parse_address(listen);
      glosa::RsuServer server(cfg);
      server.start();
      std::fprintf(stderr, "rsu: serving %zu lights on %s:%u\n", cfg.lights.size(), cfg.host.c_str(),
                   static_cast<unsigned>(server.port()));
      const auto start = std::chrono::steady_clock::now();
      while (!g_stop)
      {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        if (duration > 0.0 && std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= duration)
          break;
      }
      server.stop();
      return 0;
    }

    const auto [host, port] = glosa::parse_address(address);
    glosa::RsuClient client(host, port, glosa::SubscribeRequest{client_id, lights});
    const auto start = std::chrono::steady_clock::now();
    while (!g_stop && client.open())
    {
      for (const auto& r : client.poll(std::chrono::milliseconds(100)))
        std::cout << glosa::encode_message(r.message) << std::flush;
      if (client.error())
      {
        std::cerr << "rsu: service error: " << *client.error() << '\n';
        return 1;
      }
      if (mirror_for > 0.0 && std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= mirror_for)
        break;
    }
    if (client.error())
    {
      std::cerr << "rsu: service error: " << *client.error() << '\n';
      return 1;
    }
    return 0;
  }
  catch (const std::exception& e)
  {
    std::cerr << "rsu: " << e.what() << '\n';
    return 2;
  }
}
