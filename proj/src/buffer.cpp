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

#include "offload/buffer.hpp"

#include <cstring>

namespace offload {

  BufferServer::BufferServer(const std::shared_ptr<DeviceServer>& device, std::uint64_t size)
    : device_(device)
    , device_raw_(device.get())
  {
    if(size == 0)
      throw Error(Errc::bad_args, "buffer size must be positive");
    device->reserve_memory(size);
    try {
      storage_.assign(size, 0);
    } catch(const std::bad_alloc&) {
      device->release_memory(size);
      throw Error(Errc::out_of_memory, std::to_string(size) + " bytes");
    }
  }

  BufferServer::~BufferServer()
  {
    if(auto d = device_.lock())
      d->release_memory(storage_.size());
  }

  std::shared_ptr<DeviceServer> BufferServer::lock_device() const
  {
    auto d = device_.lock();
    if(!d)
      throw Error(Errc::unknown_gid, "buffer's device is gone");
    return d;
  }

  void BufferServer::check_range(std::uint64_t offset, std::uint64_t size) const
  {
    if(offset > storage_.size() || size > storage_.size() - offset)
      throw Error(Errc::oob_access, "range [" + std::to_string(offset) + ", +" + std::to_string(size) +
                                        ") exceeds buffer of " + std::to_string(storage_.size()) +
                                        " bytes");
  }

  Token<Unit> BufferServer::write(StreamId stream, std::uint64_t offset, Bytes data)
  {
    try {
      check_range(offset, data.size());
      auto device = lock_device();
      std::uint64_t n = data.size();
      return device->submit(stream, OpCost{OpKind::write, n},
                            [self = shared_from_this(), offset, data = std::move(data)](OpContext&) {
                              if(!data.empty())
                                std::memcpy(self->storage_.data() + offset, data.data(), data.size());
                            });
    } catch(...) {
      return make_failed<Unit>(std::current_exception());
    }
  }

  Token<Bytes> BufferServer::read(StreamId stream, std::uint64_t offset, std::uint64_t size)
  {
    try {
      check_range(offset, size);
      auto device = lock_device();
      return device->submit<Bytes>(stream, OpCost{OpKind::read, size},
                                   [self = shared_from_this(), offset, size](OpContext&) {
                                     auto first = self->storage_.begin() + std::ptrdiff_t(offset);
                                     return Bytes(first, first + std::ptrdiff_t(size));
                                   });
    } catch(...) {
      return make_failed<Bytes>(std::current_exception());
    }
  }

}; // namespace offload
