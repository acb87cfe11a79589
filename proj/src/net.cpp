/*
 * Copyright 2026 The secagg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "secagg/net.hpp"

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
#include <deque>
#include <vector>

#include "secagg/random.hpp"

namespace secagg {

namespace {

double steady_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void set_nonblocking(int fd) {
  int flags = fcntl(fd, F_GETFL, 0);
  fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

[[noreturn]] void sys_fail(const std::string& what) {
  throw Error(ErrorCode::kIo, what + ": " + std::strerror(errno));
}

std::pair<std::string, std::uint16_t> split_endpoint(const std::string& ep) {
  auto colon = ep.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint '" + ep + "' is not host:port");
  }
  int port = std::stoi(ep.substr(colon + 1));
  if (port <= 0 || port > 65535) throw Error(ErrorCode::kInvalidArgument, "bad port in " + ep);
  return {ep.substr(0, colon), static_cast<std::uint16_t>(port)};
}

}  // namespace

struct TcpTransport::Connection {
  int fd = -1;
  std::string endpoint;  // empty for accepted connections
  Bytes in;
  std::deque<Bytes> out;
  std::size_t out_offset = 0;
};

TcpTransport::TcpTransport(const std::string& host, std::uint16_t port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) sys_fail("socket");
  int one = 1;
  setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw Error(ErrorCode::kInvalidArgument, "bind host must be an IPv4 address: " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 64) != 0) {
    int saved = errno;
    ::close(listen_fd_);
    errno = saved;
    sys_fail("bind/listen " + host + ":" + std::to_string(port));
  }
  socklen_t len = sizeof(addr);
  getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  endpoint_ = host + ":" + std::to_string(ntohs(addr.sin_port));
  set_nonblocking(listen_fd_);
  if (::pipe(wake_fds_) != 0) sys_fail("pipe");
  set_nonblocking(wake_fds_[0]);
  set_nonblocking(wake_fds_[1]);
}

TcpTransport::~TcpTransport() {
  stop();
  for (auto& [fd, c] : conns_) ::close(fd);
  if (listen_fd_ >= 0) ::close(listen_fd_);
  if (wake_fds_[0] >= 0) ::close(wake_fds_[0]);
  if (wake_fds_[1] >= 0) ::close(wake_fds_[1]);
}

void TcpTransport::start() {
  if (running_.exchange(true)) return;
  thread_ = std::thread([this] { loop(); });
}

void TcpTransport::stop() {
  if (!running_.exchange(false)) return;
  wake();
  if (thread_.joinable()) thread_.join();
}

void TcpTransport::wake() {
  const char b = 1;
  [[maybe_unused]] auto n = ::write(wake_fds_[1], &b, 1);
}

double TcpTransport::now() const { return steady_seconds(); }

double TcpTransport::send(const std::string& endpoint, Bytes frame) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    pending_.emplace(endpoint, std::move(frame));
  }
  wake();
  return now();
}

void TcpTransport::call_after(double delay_s, std::function<void()> fn) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    timers_.emplace(now() + std::max(0.0, delay_s), std::move(fn));
  }
  wake();
}

TcpTransport::Connection* TcpTransport::outbound(const std::string& endpoint) {
  if (auto it = by_endpoint_.find(endpoint); it != by_endpoint_.end()) {
    return conns_.at(it->second).get();
  }
  auto [host, port] = split_endpoint(endpoint);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    return nullptr;
  }
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0 || ::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
    if (fd >= 0) ::close(fd);
    freeaddrinfo(res);
    return nullptr;
  }
  freeaddrinfo(res);
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  set_nonblocking(fd);
  auto conn = std::make_unique<Connection>();
  conn->fd = fd;
  conn->endpoint = endpoint;
  Connection* raw = conn.get();
  conns_.emplace(fd, std::move(conn));
  by_endpoint_[endpoint] = fd;
  return raw;
}

void TcpTransport::loop() {
  std::vector<pollfd> fds;
  while (running_) {
    std::multimap<std::string, Bytes> sends;
    std::vector<std::function<void()>> due;
    double next_timer = 0.1;
    {
      std::lock_guard<std::mutex> lock(mu_);
      sends.swap(pending_);
      const double t = now();
      while (!timers_.empty() && timers_.begin()->first <= t) {
        due.push_back(std::move(timers_.begin()->second));
        timers_.erase(timers_.begin());
      }
      if (!timers_.empty()) next_timer = std::min(next_timer, timers_.begin()->first - t);
    }
    for (auto& [ep, bytes] : sends) {
      Connection* c = outbound(ep);
      if (c != nullptr) c->out.push_back(std::move(bytes));
    }
    for (auto& fn : due) fn();
    if (!due.empty()) continue;  // timers may have queued sends

    fds.clear();
    fds.push_back(pollfd{wake_fds_[0], POLLIN, 0});
    fds.push_back(pollfd{listen_fd_, POLLIN, 0});
    for (auto& [fd, c] : conns_) {
      short ev = POLLIN;
      if (!c->out.empty()) ev |= POLLOUT;
      fds.push_back(pollfd{fd, ev, 0});
    }
    int timeout_ms = static_cast<int>(std::max(0.0, next_timer) * 1000.0) + 1;
    if (::poll(fds.data(), fds.size(), timeout_ms) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (fds[0].revents & POLLIN) {
      char buf[256];
      while (::read(wake_fds_[0], buf, sizeof(buf)) > 0) {
      }
    }
    if (fds[1].revents & POLLIN) {
      for (;;) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) break;
        set_nonblocking(fd);
        auto conn = std::make_unique<Connection>();
        conn->fd = fd;
        conns_.emplace(fd, std::move(conn));
      }
    }
    std::vector<int> closed;
    for (std::size_t i = 2; i < fds.size(); ++i) {
      auto it = conns_.find(fds[i].fd);
      if (it == conns_.end()) continue;
      Connection& c = *it->second;
      bool dead = (fds[i].revents & (POLLERR | POLLNVAL)) != 0;
      if (!dead && (fds[i].revents & (POLLIN | POLLHUP))) {
        std::uint8_t buf[65536];
        for (;;) {
          ssize_t n = ::recv(c.fd, buf, sizeof(buf), 0);
          if (n > 0) {
            c.in.insert(c.in.end(), buf, buf + n);
            continue;
          }
          if (n == 0 || (errno != EAGAIN && errno != EWOULDBLOCK)) dead = true;
          break;
        }
        std::size_t used = 0;
        while (c.in.size() - used >= 4) {
          ByteReader r(ByteView(c.in).subspan(used, 4));
          const std::uint32_t len = r.u32();
          if (len > kMaxPayloadBytes) {
            dead = true;
            break;
          }
          const std::size_t total = kFrameHeaderBytes + len;
          if (c.in.size() - used < total) break;
          if (handler_ != nullptr) handler_->on_frame(ByteView(c.in).subspan(used, total));
          used += total;
        }
        c.in.erase(c.in.begin(), c.in.begin() + static_cast<std::ptrdiff_t>(used));
      }
      while (!dead && !c.out.empty() && (fds[i].revents & POLLOUT)) {
        const Bytes& front = c.out.front();
        ssize_t n = ::send(c.fd, front.data() + c.out_offset, front.size() - c.out_offset,
                           MSG_NOSIGNAL);
        if (n < 0) {
          if (errno != EAGAIN && errno != EWOULDBLOCK) dead = true;
          break;
        }
        c.out_offset += static_cast<std::size_t>(n);
        if (c.out_offset == front.size()) {
          c.out.pop_front();
          c.out_offset = 0;
        }
      }
      if (dead) closed.push_back(c.fd);
    }
    for (int fd : closed) {
      auto it = conns_.find(fd);
      if (!it->second->endpoint.empty()) by_endpoint_.erase(it->second->endpoint);
      ::close(fd);
      conns_.erase(it);
    }
  }
}

// ---------------------------------------------------------------------------

ScenarioResult run_scenario_tcp(const Scenario& scenario, double timeout_s) {
  scenario.validate();
  if (!scenario.failure_plan.empty() || scenario.collusion_plan) {
    throw Error(ErrorCode::kInvalidArgument,
                "failure and collusion plans need the simulated network");
  }
  const Seed root = derive_seed("secagg-sim", scenario.seed);
  JobId job_id{};
  const Seed job_seed = derive_seed(root, "job");
  std::copy_n(job_seed.begin(), job_id.size(), job_id.begin());

  TcpTransport coord_net;
  Coordinator coordinator(coord_net);
  coord_net.set_handler(&coordinator);

  std::vector<std::unique_ptr<TcpTransport>> nets;
  std::vector<std::unique_ptr<GradientSource>> sources;
  std::vector<std::unique_ptr<RandomSource>> rngs;
  std::vector<std::unique_ptr<LearnerClient>> learners;

  JobConfig job;
  job.job_id = job_id;
  job.expected_members = static_cast<std::uint32_t>(scenario.parties);
  job.protocol = scenario.protocol;
  job.strategy = scenario.strategy;
  job.key_bits = scenario.key_bits;
  job.codec = scenario.codec;
  job.total_rounds = scenario.rounds;
  job.rotation = scenario.rotation;
  job.heartbeat = scenario.heartbeat;
  job.vector_length = scenario.vector_length;
  job.key_seed = derive_seed(root, "keys");
  for (std::size_t i = 1; i <= scenario.parties; ++i) {
    std::string name = SimCluster::learner_name(i);
    job.tokens[name] = derive_seed(root, "token-" + name);
  }
  coordinator.create_job(job);

  for (std::size_t i = 1; i <= scenario.parties; ++i) {
    std::string name = SimCluster::learner_name(i);
    nets.push_back(std::make_unique<TcpTransport>());
    sources.push_back(std::make_unique<RandomGradientSource>(
        derive_seed(root, "gradient-" + name), scenario.vector_length));
    rngs.push_back(std::make_unique<SystemRandom>());
    LearnerConfig cfg;
    cfg.name = name;
    cfg.endpoint = nets.back()->local_endpoint();
    cfg.coordinator = coord_net.local_endpoint();
    if (scenario.strategy == RingStrategy::kLocationGrouped) {
      cfg.location_tag = "zone-" + std::to_string(i % 2);
    }
    cfg.job_id = job_id;
    cfg.token = job.tokens[name];
    learners.push_back(
        std::make_unique<LearnerClient>(cfg, *nets.back(), *sources.back(), *rngs.back()));
    learners.back()->heartbeat_interval_s = scenario.heartbeat.interval_s;
    learners.back()->measure_transform = scenario.transform == TransformTiming::kMeasured;
    nets.back()->set_handler(learners.back().get());
  }

  coord_net.start();
  for (std::size_t i = 0; i < learners.size(); ++i) {
    nets[i]->start();
    LearnerClient* l = learners[i].get();
    nets[i]->post([l] { l->start(); });
  }

  const double deadline = steady_seconds() + timeout_s;
  JobStatus status = JobStatus::kForming;
  while (steady_seconds() < deadline) {
    status = coordinator.state(job_id).status;
    if (status == JobStatus::kCompleted || status == JobStatus::kAborted) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  // Let the final RESULT frames drain.
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  for (auto& n : nets) n->stop();
  coord_net.stop();

  ScenarioResult result;
  result.events = coordinator.events(job_id);
  result.final_status = coordinator.state(job_id).status;
  result.notes.push_back("real-net: wall-clock timings, not deterministic");
  const bool measured = scenario.transform == TransformTiming::kMeasured;
  for (const RoundRecord& rec : coordinator.round_records(job_id)) {
    double max_comm = 0, max_transform = 0, max_sum = 0, last_result = rec.result_sent_time;
    for (const auto& l : learners) {
      for (const LearnerRoundTiming& t : l->timings()) {
        if (t.round != rec.round) continue;
        // Arrival times are unknown over TCP; the submission time bounds them.
        const double comm = std::max(0.0, rec.submitted_time - t.start_time - t.transform_cpu_s);
        max_comm = std::max(max_comm, comm);
        max_transform = std::max(max_transform, t.transform_cpu_s);
        max_sum = std::max(max_sum, comm + t.transform_cpu_s);
        last_result = std::max(last_result, t.result_time);
      }
    }
    const double distribution = std::max(0.0, last_result - rec.result_sent_time);
    const double decrypt = measured ? rec.decrypt_cpu_s : 0.0;
    result.rows.push_back(ReportRow{rec.parties, rec.protocol, rec.training_round,
                                    max_comm + distribution, max_transform + decrypt,
                                    max_sum + decrypt + distribution});
  }
  if (status != JobStatus::kCompleted) {
    result.exit_code = 2;
    if (status != JobStatus::kAborted) result.notes.push_back("timed out");
  }
  return result;
}

}  // namespace secagg
