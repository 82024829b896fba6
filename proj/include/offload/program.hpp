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

#ifndef OFFLOAD_PROGRAM_HPP
#define OFFLOAD_PROGRAM_HPP

#include "offload/buffer.hpp"
#include "offload/kernel.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace offload {

  // A resolved kernel argument on the owning locality.
  using LocalArg = std::variant<std::shared_ptr<BufferServer>, double, std::uint32_t>;

  // Kernel source held next to a device. Validation is deferred to build().
  class ProgramServer final : public Object, public std::enable_shared_from_this<ProgramServer> {
  public:
    // throws Error(bad_args) for empty source
    ProgramServer(const std::shared_ptr<DeviceServer>& device, std::string source);

    ObjectKind kind() const override { return ObjectKind::program; }

    const std::string& source() const { return source_; }
    const DeviceServer* device() const { return device_raw_; }

    // Compiles on the pool; on success the kernel becomes runnable.
    Token<Unit> build(std::string kernel, TaskPool& pool);

    bool is_built(const std::string& kernel) const;
    std::vector<std::string> built_kernels() const;

    // Validates the launch against the built kernel, then queues it on the
    //  request's stream. Errors: not_built, launch_config, bad_args.
    Token<Unit> run(const std::string& kernel, std::vector<LocalArg> args, const Dim3& grid,
                    const Dim3& block, StreamId stream);

  private:
    std::weak_ptr<DeviceServer> device_;
    const DeviceServer* device_raw_;
    std::string source_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const kernel::KernelIR>, std::less<>> built_;
  };

}; // namespace offload

#endif
