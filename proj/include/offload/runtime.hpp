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

#ifndef OFFLOAD_RUNTIME_HPP
#define OFFLOAD_RUNTIME_HPP

#include "offload/local_endpoint.hpp"
#include "offload/remote_endpoint.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace offload {

  class Buffer;
  class Program;

  // Client reference to a device anywhere. Cheap to copy; every call routes
  //  through the endpoint of the locality that owns the GID.
  class Device {
  public:
    Device() = default;
    Device(std::shared_ptr<Endpoint> endpoint, GlobalId gid, DeviceInfo info);

    const GlobalId& gid() const { return gid_; }
    // snapshot taken at discovery
    const DeviceInfo& info() const { return info_; }
    const std::shared_ptr<Endpoint>& endpoint() const { return endpoint_; }

    Token<DeviceInfo> device_info() const;
    Token<StreamId> create_stream() const;
    Token<Unit> synchronize() const;
    // like synchronize, yielding the device's virtual clock (0 on host)
    Token<double> synchronize_clock() const;

    Token<Buffer> create_buffer(std::uint64_t size) const;
    Token<Program> create_program_with_source(std::string source) const;
    Token<Program> create_program_with_file(const std::filesystem::path& path) const;

  private:
    std::shared_ptr<Endpoint> endpoint_;
    GlobalId gid_;
    DeviceInfo info_;
  };

  class Buffer {
  public:
    Buffer() = default;
    Buffer(std::shared_ptr<Endpoint> endpoint, GlobalId gid, GlobalId device, std::uint64_t size);

    const GlobalId& gid() const { return gid_; }
    const GlobalId& device() const { return device_; }
    std::uint64_t size() const { return size_; }
    const std::shared_ptr<Endpoint>& endpoint() const { return endpoint_; }

    Token<Unit> enqueue_write(std::uint64_t offset, Bytes data, StreamId stream = default_stream) const;
    Token<Unit> enqueue_write(std::uint64_t offset, const void* data, std::size_t size,
                              StreamId stream = default_stream) const;
    Token<Bytes> enqueue_read(std::uint64_t offset, std::uint64_t size, StreamId stream = default_stream) const;
    Bytes enqueue_read_sync(std::uint64_t offset, std::uint64_t size, StreamId stream = default_stream) const;

    // drops the registration; queued operations still complete
    Token<Unit> release() const;

  private:
    std::shared_ptr<Endpoint> endpoint_;
    GlobalId gid_;
    GlobalId device_;
    std::uint64_t size_ = 0;
  };

  // Device-to-device copy as read followed by write, routed through this
  //  process. Works across devices and localities. Both sides use their
  //  default stream unless given.
  Token<Unit> copy(const Buffer& src, std::uint64_t src_offset, const Buffer& dst, std::uint64_t dst_offset,
                   std::uint64_t size, StreamId src_stream = default_stream,
                   StreamId dst_stream = default_stream);

  struct KernelArg {
    KernelArg(const Buffer& b)
      : value(b.gid())
    {}
    KernelArg(double v)
      : value(v)
    {}
    KernelArg(std::uint32_t v)
      : value(v)
    {}

    ArgValue value;
  };

  class Program {
  public:
    Program() = default;
    Program(std::shared_ptr<Endpoint> endpoint, GlobalId gid, GlobalId device);

    const GlobalId& gid() const { return gid_; }
    const GlobalId& device() const { return device_; }

    Token<Unit> build(std::string kernel) const;
    Token<Unit> run(const std::vector<KernelArg>& args, std::string kernel, const Dim3& grid, const Dim3& block,
                    StreamId stream = default_stream) const;
    Token<Unit> release() const;

  private:
    std::shared_ptr<Endpoint> endpoint_;
    GlobalId gid_;
    GlobalId device_;
  };

  struct RuntimeOptions {
    BackendKind backend = BackendKind::host;
    SimProfile profile;
    // empty means a single default device
    std::vector<DeviceInfo> devices;
    std::size_t pool_threads = default_worker_count();
    // per device, including its dispatcher
    std::size_t compute_workers = default_worker_count();
  };

  DeviceInfo default_device_info(BackendKind backend);

  // One process's view of the system: the local devices plus any connected
  //  daemons. Must outlive every handle obtained from it.
  class Runtime {
  public:
    explicit Runtime(RuntimeOptions options = {});
    ~Runtime();

    Runtime(const Runtime&) = delete;
    Runtime& operator=(const Runtime&) = delete;

    Registry& registry() { return *registry_; }
    TaskPool& pool() { return *pool_; }
    const std::shared_ptr<LocalEndpoint>& local() const { return local_; }
    BackendKind backend() const { return options_.backend; }

    // adds a remote locality; throws Error(connection_refused)
    std::uint32_t connect(const std::string& address);

    // Local devices first, then each connected remote by locality id; only
    //  those with capability >= (major, minor).
    Token<std::vector<Device>> get_all_devices(std::uint32_t major, std::uint32_t minor);

    // server object behind a local device handle, for inspection
    std::shared_ptr<DeviceServer> device_server(const Device& device) const;

  private:
    RuntimeOptions options_;
    std::shared_ptr<Registry> registry_;
    std::shared_ptr<TaskPool> pool_;
    std::shared_ptr<LocalEndpoint> local_;
  };

}; // namespace offload

#endif
