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

// TCP transport for running nodes over real sockets. Each transport owns one
// event-loop thread; frame handlers and timer callbacks all run there.

#ifndef SECAGG_NET_HPP_
#define SECAGG_NET_HPP_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "secagg/sim.hpp"
#include "secagg/transport.hpp"

namespace secagg {

class TcpTransport final : public Transport {
 public:
  // Binds host:port; port 0 picks a free port.
  explicit TcpTransport(const std::string& host = "127.0.0.1", std::uint16_t port = 0);
  ~TcpTransport() override;

  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  void set_handler(FrameHandler* handler) { handler_ = handler; }
  void start();
  // Joins the loop thread; pending sends are dropped.
  void stop();
  // Runs fn on the loop thread.
  void post(std::function<void()> fn) { call_after(0, std::move(fn)); }

  // Queues the frame; returns the current time because arrival is unknown.
  double send(const std::string& endpoint, Bytes frame) override;
  double now() const override;
  void call_after(double delay_s, std::function<void()> fn) override;
  const std::string& local_endpoint() const override { return endpoint_; }

 private:
  struct Connection;

  void loop();
  void wake();
  Connection* outbound(const std::string& endpoint);

  std::string endpoint_;
  int listen_fd_ = -1;
  int wake_fds_[2] = {-1, -1};
  FrameHandler* handler_ = nullptr;
  std::thread thread_;
  std::atomic<bool> running_{false};

  std::mutex mu_;  // guards pending_ and timers_
  std::multimap<std::string, Bytes> pending_;
  std::multimap<double, std::function<void()>> timers_;

  // Loop-thread only.
  std::map<int, std::unique_ptr<Connection>> conns_;
  std::map<std::string, int> by_endpoint_;
};

// Same cluster layout as the simulator, but every node talks over loopback
// TCP and times are wall-clock. Failure and collusion plans are not
// supported here.
ScenarioResult run_scenario_tcp(const Scenario& scenario, double timeout_s = 600);

}  // namespace secagg

#endif  // SECAGG_NET_HPP_
