/* Copyright 2026 The Offload Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Value types shared between the client handles, the local servers and the
//  wire protocol.

#ifndef OFFLOAD_TYPES_HPP
#define OFFLOAD_TYPES_HPP

#include "offload/global_id.hpp"

#include <cstdint>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace offload {

  using Bytes = std::vector<std::uint8_t>;

  struct StreamId {
    std::uint32_t index = 0; // 0 is the default stream

    friend auto operator<=>(const StreamId&, const StreamId&) = default;
  };

  inline constexpr StreamId default_stream{0};

  struct Capability {
    std::uint32_t major = 0;
    std::uint32_t minor = 0;

    friend auto operator<=>(const Capability&, const Capability&) = default;
  };

  struct DeviceInfo {
    std::string name;
    Capability capability;
    std::uint64_t memory_bytes = 0;
    std::uint32_t compute_units = 1;

    friend bool operator==(const DeviceInfo&, const DeviceInfo&) = default;
  };

  struct DeviceEntry {
    GlobalId gid;
    DeviceInfo info;
  };

  struct Dim3 {
    std::uint32_t x = 1;
    std::uint32_t y = 1;
    std::uint32_t z = 1;

    std::uint64_t volume() const { return std::uint64_t(x) * y * z; }

    friend bool operator==(const Dim3&, const Dim3&) = default;
  };

  // A kernel argument as it travels between localities: a buffer reference
  //  or a scalar.
  using ArgValue = std::variant<GlobalId, double, std::uint32_t>;

  struct RunRequest {
    std::string kernel;
    std::vector<ArgValue> args;
    Dim3 grid;
    Dim3 block;
    StreamId stream;
  };

}; // namespace offload

#endif
