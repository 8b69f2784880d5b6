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

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "glosa/error.hpp"
#include "glosa/rsu_service.hpp"

namespace glosa
{
namespace
{

constexpr std::size_t kMaxLineBytes = 64 * 1024;

std::string errno_text(const char* what)
{
  return std::string(what) + ": " + std::strerror(errno);
}

void set_nonblocking(int fd)
{
  const int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

sockaddr_in resolve(const std::string& host, std::uint16_t port)
{
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1)
    return addr;

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr)
    throw TransportError("cannot resolve host '" + host + "'");
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

}  // namespace

// Session state owned by the server thread. The sink appends to `outbox`, which the
// loop flushes when the socket is writable.
struct RsuServer::Connection : MessageSink
{
  int fd = -1;
  std::string inbox;
  std::string outbox;
  std::string client_id;
  bool subscribed = false;
  bool closing = false;  // flush what is queued, then close
  bool dead = false;
  std::size_t max_backlog = 0;

  bool deliver(const RsuMessage& m) override
  {
    if (dead || closing)
      return false;
    if (outbox.size() > max_backlog)
    {
      dead = true;
      return false;
    }
    outbox += encode_message(m);
    return true;
  }
};

RsuServer::RsuServer(RsuConfig config) : config_(std::move(config))
{
  if (!(config_.time_scale > 0.0))
    throw InvalidInput("time_scale must be positive");
}

RsuServer::~RsuServer()
{
  stop();
}

double RsuServer::now() const
{
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started_;
  return config_.time_offset_s + config_.time_scale * elapsed.count();
}

std::size_t RsuServer::session_count() const
{
  return broadcaster_ ? broadcaster_->session_count() : 0;
}

void RsuServer::start()
{
  if (running_)
    return;
  broadcaster_ = std::make_unique<RsuBroadcaster>(config_.lights, config_.cadence, config_.time_offset_s);

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0)
    throw TransportError(errno_text("socket"));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = resolve(config_.host, config_.port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
  {
    const std::string msg = errno_text("bind") + " (" + config_.host + ":" + std::to_string(config_.port) + ")";
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw TransportError(msg);
  }
  if (::listen(listen_fd_, 16) != 0)
  {
    const std::string msg = errno_text("listen");
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw TransportError(msg);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  bound_port_ = ntohs(addr.sin_port);
  set_nonblocking(listen_fd_);

  started_ = std::chrono::steady_clock::now();
  stop_requested_ = false;
  running_ = true;
  thread_ = std::thread([this] { loop(); });
}

void RsuServer::stop()
{
  stop_requested_ = true;
  if (thread_.joinable())
    thread_.join();
  for (auto& c : connections_)
  {
    if (c->fd >= 0)
      ::close(c->fd);
    c->fd = -1;
  }
  connections_.clear();
  if (listen_fd_ >= 0)
    ::close(listen_fd_);
  listen_fd_ = -1;
  running_ = false;
}

void RsuServer::loop()
{
  std::vector<pollfd> fds;
  char buf[4096];

  while (!stop_requested_)
  {
    fds.clear();
    fds.push_back({listen_fd_, POLLIN, 0});
    for (const auto& c : connections_)
    {
      short events = POLLIN;
      if (!c->outbox.empty())
        events |= POLLOUT;
      fds.push_back({c->fd, events, 0});
    }
    ::poll(fds.data(), fds.size(), 2);

    if (fds[0].revents & POLLIN)
    {
      while (true)
      {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0)
          break;
        set_nonblocking(fd);
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        auto conn = std::make_shared<Connection>();
        conn->fd = fd;
        conn->max_backlog = config_.max_backlog_bytes;
        connections_.push_back(std::move(conn));
      }
    }

    for (std::size_t i = 1; i < fds.size() && i - 1 < connections_.size(); ++i)
    {
      auto& c = *connections_[i - 1];
      if (fds[i].revents & (POLLIN | POLLHUP | POLLERR))
      {
        while (true)
        {
          const ssize_t n = ::recv(c.fd, buf, sizeof(buf), 0);
          if (n > 0)
          {
            c.inbox.append(buf, static_cast<std::size_t>(n));
            continue;
          }
          if (n == 0 || (errno != EAGAIN && errno != EWOULDBLOCK))
            c.dead = true;
          break;
        }
      }

      std::size_t eol;
      while (!c.dead && !c.closing && (eol = c.inbox.find('\n')) != std::string::npos)
      {
        const std::string line = c.inbox.substr(0, eol);
        c.inbox.erase(0, eol + 1);
        if (c.subscribed)
          continue;  // clients have nothing else to say
        try
        {
          const SubscribeRequest req = decode_subscribe(line);
          std::shared_ptr<Connection> self = connections_[i - 1];
          broadcaster_->subscribe(req, self, now());
          c.client_id = req.client_id;
          c.subscribed = true;
        }
        catch (const InvalidInput& e)
        {
          c.outbox += encode_error(e.what());
          c.closing = true;
        }
      }
      if (c.inbox.size() > kMaxLineBytes)
      {
        c.outbox += encode_error("line too long");
        c.closing = true;
      }
    }

    broadcaster_->broadcast_tick(now());

    for (auto& cp : connections_)
    {
      auto& c = *cp;
      while (!c.dead && !c.outbox.empty())
      {
        const ssize_t n = ::send(c.fd, c.outbox.data(), c.outbox.size(), MSG_NOSIGNAL);
        if (n > 0)
        {
          c.outbox.erase(0, static_cast<std::size_t>(n));
          continue;
        }
        if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK)
          c.dead = true;
        break;
      }
      if (c.closing && c.outbox.empty())
        c.dead = true;
    }

    for (auto it = connections_.begin(); it != connections_.end();)
    {
      if ((*it)->dead)
      {
        if ((*it)->subscribed)
          broadcaster_->unsubscribe((*it)->client_id, it->get());
        ::close((*it)->fd);
        (*it)->fd = -1;
        it = connections_.erase(it);
      }
      else
      {
        ++it;
      }
    }
  }
}

RsuClient::RsuClient(const std::string& host, std::uint16_t port, SubscribeRequest request)
{
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0)
    throw TransportError(errno_text("socket"));
  sockaddr_in addr = resolve(host, port);
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
  {
    const std::string msg = errno_text("connect") + " (" + host + ":" + std::to_string(port) + ")";
    ::close(fd_);
    fd_ = -1;
    throw TransportError(msg);
  }
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  const std::string line = encode_subscribe(request);
  if (::send(fd_, line.data(), line.size(), MSG_NOSIGNAL) != static_cast<ssize_t>(line.size()))
  {
    const std::string msg = errno_text("send");
    ::close(fd_);
    fd_ = -1;
    throw TransportError(msg);
  }
  open_ = true;
  reader_ = std::thread([this] { read_loop(); });
}

RsuClient::~RsuClient()
{
  close();
}

void RsuClient::close()
{
  if (fd_ >= 0)
    ::shutdown(fd_, SHUT_RDWR);
  if (reader_.joinable())
    reader_.join();
  if (fd_ >= 0)
    ::close(fd_);
  fd_ = -1;
  open_ = false;
}

void RsuClient::read_loop()
{
  std::string pending;
  char buf[4096];
  while (true)
  {
    const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
    if (n <= 0)
      break;
    const auto at = std::chrono::steady_clock::now();
    pending.append(buf, static_cast<std::size_t>(n));
    std::size_t eol;
    std::vector<Received> batch;
    std::optional<std::string> err;
    while ((eol = pending.find('\n')) != std::string::npos)
    {
      const std::string line = pending.substr(0, eol);
      pending.erase(0, eol + 1);
      try
      {
        ServerLine sl = decode_server_line(line);
        if (sl.error)
          err = sl.error;
        else
          batch.push_back({std::move(*sl.message), at});
      }
      catch (const InvalidInput& e)
      {
        err = std::string("protocol error: ") + e.what();
      }
    }
    {
      std::lock_guard lock(mutex_);
      for (auto& r : batch)
        queue_.push_back(std::move(r));
      if (err)
        error_ = err;
    }
    cv_.notify_all();
  }
  open_ = false;
  cv_.notify_all();
}

std::vector<RsuClient::Received> RsuClient::poll(std::chrono::milliseconds timeout)
{
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [this] { return !queue_.empty() || !open_.load(); });
  std::vector<Received> out(std::make_move_iterator(queue_.begin()), std::make_move_iterator(queue_.end()));
  queue_.clear();
  return out;
}

std::optional<std::string> RsuClient::error() const
{
  std::lock_guard lock(mutex_);
  return error_;
}

}  // namespace glosa
