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

#include "offload/runtime.hpp"

#include <fstream>
#include <sstream>

namespace offload {

  Device::Device(std::shared_ptr<Endpoint> endpoint, GlobalId gid, DeviceInfo info)
    : endpoint_(std::move(endpoint))
    , gid_(gid)
    , info_(std::move(info))
  {}

  Token<DeviceInfo> Device::device_info() const { return endpoint_->device_info(gid_); }

  Token<StreamId> Device::create_stream() const { return endpoint_->create_stream(gid_); }

  Token<Unit> Device::synchronize() const
  {
    return then(endpoint_->synchronize(gid_), [](double) { return Unit{}; });
  }

  Token<double> Device::synchronize_clock() const { return endpoint_->synchronize(gid_); }

  Token<Buffer> Device::create_buffer(std::uint64_t size) const
  {
    return then(endpoint_->create_buffer(gid_, size), [ep = endpoint_, dev = gid_, size](const GlobalId& g) {
      return Buffer(ep, g, dev, size);
    });
  }

  Token<Program> Device::create_program_with_source(std::string source) const
  {
    return then(endpoint_->create_program(gid_, std::move(source)),
                [ep = endpoint_, dev = gid_](const GlobalId& g) { return Program(ep, g, dev); });
  }

  Token<Program> Device::create_program_with_file(const std::filesystem::path& path) const
  {
    std::ifstream in(path, std::ios::binary);
    if(!in)
      return make_failed<Program>(Error(Errc::io_error, "cannot open " + path.string()));
    std::ostringstream os;
    os << in.rdbuf();
    return create_program_with_source(os.str());
  }

  Buffer::Buffer(std::shared_ptr<Endpoint> endpoint, GlobalId gid, GlobalId device, std::uint64_t size)
    : endpoint_(std::move(endpoint))
    , gid_(gid)
    , device_(device)
    , size_(size)
  {}

  Token<Unit> Buffer::enqueue_write(std::uint64_t offset, Bytes data, StreamId stream) const
  {
    return endpoint_->write(gid_, stream, offset, std::move(data));
  }

  Token<Unit> Buffer::enqueue_write(std::uint64_t offset, const void* data, std::size_t size,
                                    StreamId stream) const
  {
    auto* p = static_cast<const std::uint8_t*>(data);
    return enqueue_write(offset, Bytes(p, p + size), stream);
  }

  Token<Bytes> Buffer::enqueue_read(std::uint64_t offset, std::uint64_t size, StreamId stream) const
  {
    return endpoint_->read(gid_, stream, offset, size);
  }

  Bytes Buffer::enqueue_read_sync(std::uint64_t offset, std::uint64_t size, StreamId stream) const
  {
    return get(enqueue_read(offset, size, stream));
  }

  Token<Unit> Buffer::release() const { return endpoint_->unregister(gid_); }

  Token<Unit> copy(const Buffer& src, std::uint64_t src_offset, const Buffer& dst, std::uint64_t dst_offset,
                   std::uint64_t size, StreamId src_stream, StreamId dst_stream)
  {
    if(dst_offset > dst.size() || size > dst.size() - dst_offset)
      return make_failed<Unit>(Error(Errc::oob_access, "copy destination range exceeds buffer"));
    return then(src.enqueue_read(src_offset, size, src_stream),
                [dst, dst_offset, dst_stream](Bytes data) { return dst.enqueue_write(dst_offset, std::move(data), dst_stream); });
  }

  Program::Program(std::shared_ptr<Endpoint> endpoint, GlobalId gid, GlobalId device)
    : endpoint_(std::move(endpoint))
    , gid_(gid)
    , device_(device)
  {}

  Token<Unit> Program::build(std::string kernel) const { return endpoint_->build(gid_, std::move(kernel)); }

  Token<Unit> Program::run(const std::vector<KernelArg>& args, std::string kernel, const Dim3& grid,
                           const Dim3& block, StreamId stream) const
  {
    RunRequest req;
    req.kernel = std::move(kernel);
    for(const auto& a : args)
      req.args.push_back(a.value);
    req.grid = grid;
    req.block = block;
    req.stream = stream;
    return endpoint_->run(gid_, std::move(req));
  }

  Token<Unit> Program::release() const { return endpoint_->unregister(gid_); }

  DeviceInfo default_device_info(BackendKind backend)
  {
    DeviceInfo info;
    info.name = backend == BackendKind::sim ? "sim0" : "host0";
    info.capability = {1, 0};
    info.memory_bytes = std::uint64_t(4) << 30;
    info.compute_units = std::uint32_t(default_worker_count());
    return info;
  }

  Runtime::Runtime(RuntimeOptions options)
    : options_(std::move(options))
    , registry_(std::make_shared<Registry>())
    , pool_(std::make_shared<TaskPool>(std::max<std::size_t>(1, options_.pool_threads)))
    , local_(std::make_shared<LocalEndpoint>(registry_, pool_))
  {
    if(options_.backend == BackendKind::sim)
      options_.profile.validate();
    if(options_.devices.empty())
      options_.devices.push_back(default_device_info(options_.backend));
    for(const auto& info : options_.devices)
      local_->add_device(std::make_shared<DeviceServer>(info, options_.backend, options_.profile,
                                                        std::max<std::size_t>(1, options_.compute_workers)));
  }

  Runtime::~Runtime()
  {
    for(const auto& loc : registry_->localities())
      if(loc.locality_id != 0)
        if(auto remote = std::dynamic_pointer_cast<RemoteEndpoint>(registry_->proxy(loc.locality_id)))
          remote->close();
  }

  std::uint32_t Runtime::connect(const std::string& address)
  {
    auto remote = RemoteEndpoint::connect(address);
    std::uint32_t id = registry_->add_locality(address, remote);
    remote->set_locality(id);
    remote->on_disconnect([weak = std::weak_ptr<Registry>(registry_), id] {
      if(auto r = weak.lock())
        r->mark_disconnected(id);
    });
    return id;
  }

  Token<std::vector<Device>> Runtime::get_all_devices(std::uint32_t major, std::uint32_t minor)
  {
    std::vector<std::shared_ptr<Endpoint>> endpoints{local_};
    for(const auto& loc : registry_->localities())
      if(loc.locality_id != 0 && loc.connected)
        endpoints.push_back(registry_->proxy(loc.locality_id));

    std::vector<Token<std::vector<DeviceEntry>>> lists;
    for(const auto& ep : endpoints)
      lists.push_back(ep->discover());

    Capability wanted{major, minor};
    return then(when_all(lists), [endpoints, lists, wanted] {
      std::vector<Device> out;
      for(std::size_t i = 0; i < lists.size(); ++i)
        for(const auto& e : lists[i].get_ref())
          if(e.info.capability >= wanted)
            out.emplace_back(endpoints[i], e.gid, e.info);
      return out;
    });
  }

  std::shared_ptr<DeviceServer> Runtime::device_server(const Device& device) const
  {
    return registry_->resolve_local<DeviceServer>(device.gid());
  }

}; // namespace offload
