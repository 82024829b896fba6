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

#ifndef OFFLOAD_LOCAL_ENDPOINT_HPP
#define OFFLOAD_LOCAL_ENDPOINT_HPP

#include "offload/device.hpp"
#include "offload/endpoint.hpp"
#include "offload/program.hpp"
#include "offload/registry.hpp"

#include <memory>
#include <mutex>
#include <vector>

namespace offload {

  // Executes actions against objects registered in this process. Used by
  //  the application's own runtime and, behind the parcel decoder, by the
  //  daemon.
  class LocalEndpoint final : public Endpoint {
  public:
    LocalEndpoint(std::shared_ptr<Registry> registry, std::shared_ptr<TaskPool> pool);

    // registers a device and lists it in discover()
    GlobalId add_device(std::shared_ptr<DeviceServer> device);
    std::vector<std::shared_ptr<DeviceServer>> devices() const;

    Registry& registry() { return *registry_; }
    TaskPool& pool() { return *pool_; }

    std::uint32_t locality() const override { return 0; }

    Token<std::vector<DeviceEntry>> discover() override;
    Token<DeviceInfo> device_info(const GlobalId& device) override;
    Token<StreamId> create_stream(const GlobalId& device) override;
    Token<double> synchronize(const GlobalId& device) override;

    Token<GlobalId> create_buffer(const GlobalId& device, std::uint64_t size) override;
    Token<Unit> write(const GlobalId& buffer, StreamId stream, std::uint64_t offset, Bytes data) override;
    Token<Bytes> read(const GlobalId& buffer, StreamId stream, std::uint64_t offset,
                      std::uint64_t size) override;

    Token<GlobalId> create_program(const GlobalId& device, std::string source) override;
    Token<Unit> build(const GlobalId& program, std::string kernel) override;
    Token<Unit> run(const GlobalId& program, RunRequest request) override;

    // devices stay registered for the endpoint's lifetime
    Token<Unit> unregister(const GlobalId& gid) override;

  private:
    std::shared_ptr<Registry> registry_;
    std::shared_ptr<TaskPool> pool_;
    mutable std::mutex mutex_;
    std::vector<DeviceEntry> entries_;
    std::vector<std::shared_ptr<DeviceServer>> devices_;
  };

}; // namespace offload

#endif
