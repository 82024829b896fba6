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

#ifndef OFFLOAD_BUFFER_HPP
#define OFFLOAD_BUFFER_HPP

#include "offload/device.hpp"

#include <memory>

namespace offload {

  // Device-resident bytes. Zero-filled on creation and accounted against the
  //  device's memory. Every access goes through the device's stream queues,
  //  so accesses on one stream never race.
  class BufferServer final : public Object, public std::enable_shared_from_this<BufferServer> {
  public:
    // throws Error(bad_args) for size 0, Error(out_of_memory)
    BufferServer(const std::shared_ptr<DeviceServer>& device, std::uint64_t size);
    ~BufferServer() override;

    ObjectKind kind() const override { return ObjectKind::buffer; }

    std::uint64_t size() const { return storage_.size(); }
    const DeviceServer* device() const { return device_raw_; }

    // Queued operations; the buffer stays alive until they have run, even if
    //  it is unregistered meanwhile.
    Token<Unit> write(StreamId stream, std::uint64_t offset, Bytes data);
    Token<Bytes> read(StreamId stream, std::uint64_t offset, std::uint64_t size);

    // Raw storage for kernels. Only touched from the owning device's dispatcher.
    std::uint8_t* data() { return storage_.data(); }

  private:
    std::shared_ptr<DeviceServer> lock_device() const;
    void check_range(std::uint64_t offset, std::uint64_t size) const;

    std::weak_ptr<DeviceServer> device_;
    const DeviceServer* device_raw_;
    std::vector<std::uint8_t> storage_;
  };

}; // namespace offload

#endif
