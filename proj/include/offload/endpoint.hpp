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

#ifndef OFFLOAD_ENDPOINT_HPP
#define OFFLOAD_ENDPOINT_HPP

#include "offload/futures.hpp"
#include "offload/types.hpp"

#include <string>
#include <vector>

namespace offload {

  // The action set of one locality. Every client handle routes its operations
  //  through an Endpoint: LocalEndpoint executes against objects in this
  //  process, RemoteEndpoint turns each call into a parcel. The daemon feeds
  //  decoded parcels into its own LocalEndpoint, so both paths share the same
  //  execution code.
  class Endpoint {
  public:
    virtual ~Endpoint() = default;

    virtual std::uint32_t locality() const = 0;

    virtual Token<std::vector<DeviceEntry>> discover() = 0;
    virtual Token<DeviceInfo> device_info(const GlobalId& device) = 0;
    virtual Token<StreamId> create_stream(const GlobalId& device) = 0;
    // completes with the device's virtual clock (microseconds, 0 on the host
    //  backend) once all previously enqueued work has finished
    virtual Token<double> synchronize(const GlobalId& device) = 0;

    virtual Token<GlobalId> create_buffer(const GlobalId& device, std::uint64_t size) = 0;
    virtual Token<Unit> write(const GlobalId& buffer, StreamId stream, std::uint64_t offset,
                              Bytes data) = 0;
    virtual Token<Bytes> read(const GlobalId& buffer, StreamId stream, std::uint64_t offset,
                              std::uint64_t size) = 0;

    virtual Token<GlobalId> create_program(const GlobalId& device, std::string source) = 0;
    virtual Token<Unit> build(const GlobalId& program, std::string kernel) = 0;
    virtual Token<Unit> run(const GlobalId& program, RunRequest request) = 0;

    virtual Token<Unit> unregister(const GlobalId& gid) = 0;
  };

}; // namespace offload

#endif
