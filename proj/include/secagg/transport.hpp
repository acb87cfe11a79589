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

#ifndef SECAGG_TRANSPORT_HPP_
#define SECAGG_TRANSPORT_HPP_

#include <functional>
#include <string>

#include "secagg/bytes.hpp"

namespace secagg {

// Receives complete frames. Calls into one handler are serialized.
class FrameHandler {
 public:
  virtual ~FrameHandler() = default;
  virtual void on_frame(ByteView frame) = 0;
};

// A node's view of the network: reliable ordered delivery per peer, a clock
// and one-shot timers. Timer callbacks run on the same serial context as
// on_frame.
class Transport {
 public:
  virtual ~Transport() = default;

  // Returns the time at which the frame is (expected to be) delivered.
  virtual double send(const std::string& endpoint, Bytes frame) = 0;
  // Seconds on this transport's clock (virtual in simulation).
  virtual double now() const = 0;
  virtual void call_after(double delay_s, std::function<void()> fn) = 0;
  virtual const std::string& local_endpoint() const = 0;
};

}  // namespace secagg

#endif  // SECAGG_TRANSPORT_HPP_
