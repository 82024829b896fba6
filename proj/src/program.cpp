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

#include "offload/program.hpp"

namespace offload {

  ProgramServer::ProgramServer(const std::shared_ptr<DeviceServer>& device, std::string source)
    : device_(device)
    , device_raw_(device.get())
    , source_(std::move(source))
  {
    if(source_.empty())
      throw Error(Errc::bad_args, "program source is empty");
  }

  Token<Unit> ProgramServer::build(std::string kernel, TaskPool& pool)
  {
    // the source is immutable, so compiling needs no lock; only publishing does
    return async(pool, [self = shared_from_this(), kernel = std::move(kernel)] {
      auto ir = std::make_shared<const kernel::KernelIR>(kernel::compile_kernel(self->source_, kernel));
      std::lock_guard lock(self->mutex_);
      self->built_[kernel] = std::move(ir);
    });
  }

  bool ProgramServer::is_built(const std::string& kernel) const
  {
    std::lock_guard lock(mutex_);
    return built_.count(kernel) != 0;
  }

  std::vector<std::string> ProgramServer::built_kernels() const
  {
    std::lock_guard lock(mutex_);
    std::vector<std::string> names;
    for(const auto& [name, ir] : built_)
      names.push_back(name);
    return names;
  }

  Token<Unit> ProgramServer::run(const std::string& kernel, std::vector<LocalArg> args, const Dim3& grid,
                                 const Dim3& block, StreamId stream)
  {
    try {
      std::shared_ptr<const kernel::KernelIR> ir;
      {
        std::lock_guard lock(mutex_);
        auto it = built_.find(kernel);
        if(it == built_.end())
          throw Error(Errc::not_built, "kernel '" + kernel + "' has not been built");
        ir = it->second;
      }
      std::uint64_t items = kernel::check_launch(grid, block);
      if(args.size() != ir->params.size())
        throw Error(Errc::bad_args, "kernel '" + kernel + "' takes " + std::to_string(ir->params.size()) +
                                        " arguments, got " + std::to_string(args.size()));
      for(std::size_t i = 0; i < args.size(); ++i) {
        const auto& param = ir->params[i];
        bool ok = false;
        switch(param.kind) {
        case kernel::ParamKind::buffer_f64:
        case kernel::ParamKind::buffer_u32:
          if(auto* b = std::get_if<std::shared_ptr<BufferServer>>(&args[i]); b && *b) {
            if((*b)->device() != device_raw_)
              throw Error(Errc::bad_args, "argument '" + param.name + "' lives on another device");
            ok = true;
          }
          break;
        case kernel::ParamKind::scalar_f64:
          ok = std::holds_alternative<double>(args[i]);
          break;
        case kernel::ParamKind::scalar_u32:
          ok = std::holds_alternative<std::uint32_t>(args[i]);
          break;
        }
        if(!ok)
          throw Error(Errc::bad_args, "argument '" + param.name + "' must be " +
                                          std::string(kernel::to_string(param.kind)));
      }

      auto device = device_.lock();
      if(!device)
        throw Error(Errc::unknown_gid, "program's device is gone");
      DeviceServer* raw = device.get();
      return device->submit(
          stream, OpCost{OpKind::kernel, items},
          [ir, args = std::move(args), grid, block, raw](OpContext& ctx) {
            std::vector<kernel::BoundArg> bound(args.size());
            for(std::size_t i = 0; i < args.size(); ++i) {
              bound[i].kind = ir->params[i].kind;
              if(auto* b = std::get_if<std::shared_ptr<BufferServer>>(&args[i])) {
                bound[i].data = (*b)->data();
                bound[i].size_bytes = (*b)->size();
              } else if(auto* f = std::get_if<double>(&args[i])) {
                bound[i].scalar.f = *f;
              } else {
                bound[i].scalar.u = std::get<std::uint32_t>(args[i]);
              }
            }
            // the op runs on raw's own dispatcher, so raw outlives it
            ctx.work_items = kernel::execute(*ir, bound, grid, block,
                                             [raw](std::uint64_t count, const auto& body) {
                                               raw->parallel_for(count, body);
                                             });
          });
    } catch(...) {
      return make_failed<Unit>(std::current_exception());
    }
  }

}; // namespace offload
