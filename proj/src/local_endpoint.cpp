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

#include "offload/local_endpoint.hpp"

namespace offload {

  namespace {

    // Runs f and turns a synchronous throw into a failed token.
    template <typename F>
    auto guarded(F&& f) -> decltype(f())
    {
      using TokenType = decltype(f());
      try {
        return f();
      } catch(...) {
        return TokenType(make_failed<typename TokenType::value_type>(std::current_exception()));
      }
    }

  };

  LocalEndpoint::LocalEndpoint(std::shared_ptr<Registry> registry, std::shared_ptr<TaskPool> pool)
    : registry_(std::move(registry))
    , pool_(std::move(pool))
  {}

  GlobalId LocalEndpoint::add_device(std::shared_ptr<DeviceServer> device)
  {
    GlobalId gid = registry_->register_object(device);
    std::lock_guard lock(mutex_);
    entries_.push_back(DeviceEntry{gid, device->info()});
    devices_.push_back(std::move(device));
    return gid;
  }

  std::vector<std::shared_ptr<DeviceServer>> LocalEndpoint::devices() const
  {
    std::lock_guard lock(mutex_);
    return devices_;
  }

  Token<std::vector<DeviceEntry>> LocalEndpoint::discover()
  {
    std::lock_guard lock(mutex_);
    return make_ready(entries_);
  }

  Token<DeviceInfo> LocalEndpoint::device_info(const GlobalId& device)
  {
    return guarded([&] { return make_ready(registry_->resolve_local<DeviceServer>(device)->info()); });
  }

  Token<StreamId> LocalEndpoint::create_stream(const GlobalId& device)
  {
    return guarded([&] { return make_ready(registry_->resolve_local<DeviceServer>(device)->create_stream()); });
  }

  Token<double> LocalEndpoint::synchronize(const GlobalId& device)
  {
    return guarded([&] { return registry_->resolve_local<DeviceServer>(device)->synchronize(); });
  }

  Token<GlobalId> LocalEndpoint::create_buffer(const GlobalId& device, std::uint64_t size)
  {
    return guarded([&] {
      auto d = registry_->resolve_local<DeviceServer>(device);
      return make_ready(registry_->register_object(std::make_shared<BufferServer>(d, size)));
    });
  }

  Token<Unit> LocalEndpoint::write(const GlobalId& buffer, StreamId stream, std::uint64_t offset, Bytes data)
  {
    return guarded([&] {
      return registry_->resolve_local<BufferServer>(buffer)->write(stream, offset, std::move(data));
    });
  }

  Token<Bytes> LocalEndpoint::read(const GlobalId& buffer, StreamId stream, std::uint64_t offset,
                                   std::uint64_t size)
  {
    return guarded([&] { return registry_->resolve_local<BufferServer>(buffer)->read(stream, offset, size); });
  }

  Token<GlobalId> LocalEndpoint::create_program(const GlobalId& device, std::string source)
  {
    return guarded([&] {
      auto d = registry_->resolve_local<DeviceServer>(device);
      return make_ready(registry_->register_object(std::make_shared<ProgramServer>(d, std::move(source))));
    });
  }

  Token<Unit> LocalEndpoint::build(const GlobalId& program, std::string kernel)
  {
    return guarded([&] { return registry_->resolve_local<ProgramServer>(program)->build(std::move(kernel), *pool_); });
  }

  Token<Unit> LocalEndpoint::run(const GlobalId& program, RunRequest request)
  {
    return guarded([&] {
      auto p = registry_->resolve_local<ProgramServer>(program);
      std::vector<LocalArg> args;
      args.reserve(request.args.size());
      for(const auto& a : request.args) {
        if(auto* gid = std::get_if<GlobalId>(&a))
          args.emplace_back(registry_->resolve_local<BufferServer>(*gid));
        else if(auto* f = std::get_if<double>(&a))
          args.emplace_back(*f);
        else
          args.emplace_back(std::get<std::uint32_t>(a));
      }
      return p->run(request.kernel, std::move(args), request.grid, request.block, request.stream);
    });
  }

  Token<Unit> LocalEndpoint::unregister(const GlobalId& gid)
  {
    return guarded([&] {
      Resolution r = registry_->resolve(gid);
      if(r.is_local() && r.object()->kind() == ObjectKind::device)
        throw Error(Errc::bad_args, "devices cannot be unregistered");
      registry_->unregister(gid);
      return make_ready();
    });
  }

}; // namespace offload
