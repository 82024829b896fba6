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

#include "offload/error.hpp"
#include "offload/kernel.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <mutex>

namespace offload::kernel {

  std::uint64_t check_launch(const Dim3& grid, const Dim3& block)
  {
    for(auto v : {grid.x, grid.y, grid.z, block.x, block.y, block.z})
      if(v == 0)
        throw Error(Errc::launch_config, "grid and block extents must be >= 1");
    // each volume is < 2^96 in theory; check stepwise to avoid overflow
    unsigned __int128 total = (unsigned __int128)grid.volume() * block.volume();
    if(total > (unsigned __int128)(1ull << 32))
      throw Error(Errc::launch_config, "more than 2^32 work items");
    return std::uint64_t(total);
  }

  namespace {

    struct Frame {
      const KernelIR& ir;
      std::span<const BoundArg> args;
      Value* locals;
      std::uint32_t gtid;
      std::uint32_t dims[5][3]; // indexed by Builtin
    };

    [[noreturn]] void out_of_range(const Frame& f, std::uint32_t param, std::uint32_t index, std::size_t count)
    {
      throw Error(Errc::oob_access, "kernel '" + f.ir.name + "': index " + std::to_string(index) +
                                        " out of range for '" + f.ir.params[param].name + "' (" +
                                        std::to_string(count) + " elements)");
    }

    std::uint32_t to_u32(double v)
    {
      if(!(v > 0.0))
        return 0; // also NaN
      if(v >= 4294967295.0)
        return 0xffffffffu;
      return std::uint32_t(v);
    }

    Value eval(const Frame& f, std::uint32_t index)
    {
      const Node& n = f.ir.nodes[index];
      Value r;
      switch(n.op) {
      case Op::const_value:
        return n.imm;
      case Op::local:
        return f.locals[n.a];
      case Op::param:
        return f.args[n.a].scalar;
      case Op::builtin:
        r.u = n.a == std::uint32_t(Builtin::gtid) ? f.gtid : f.dims[n.a][n.b];
        return r;
      case Op::load_f64: {
        std::uint32_t i = eval(f, n.b).u;
        const BoundArg& a = f.args[n.a];
        std::size_t count = a.size_bytes / sizeof(double);
        if(i >= count)
          out_of_range(f, n.a, i, count);
        std::memcpy(&r.f, a.data + std::size_t(i) * sizeof(double), sizeof(double));
        return r;
      }
      case Op::load_u32: {
        std::uint32_t i = eval(f, n.b).u;
        const BoundArg& a = f.args[n.a];
        std::size_t count = a.size_bytes / sizeof(std::uint32_t);
        if(i >= count)
          out_of_range(f, n.a, i, count);
        std::memcpy(&r.u, a.data + std::size_t(i) * sizeof(std::uint32_t), sizeof(std::uint32_t));
        return r;
      }
      case Op::add_f64: r.f = eval(f, n.a).f + eval(f, n.b).f; return r;
      case Op::sub_f64: r.f = eval(f, n.a).f - eval(f, n.b).f; return r;
      case Op::mul_f64: r.f = eval(f, n.a).f * eval(f, n.b).f; return r;
      case Op::div_f64: r.f = eval(f, n.a).f / eval(f, n.b).f; return r;
      case Op::add_u32: r.u = eval(f, n.a).u + eval(f, n.b).u; return r;
      case Op::sub_u32: r.u = eval(f, n.a).u - eval(f, n.b).u; return r;
      case Op::mul_u32: r.u = eval(f, n.a).u * eval(f, n.b).u; return r;
      case Op::div_u32:
      case Op::mod_u32: {
        std::uint32_t x = eval(f, n.a).u;
        std::uint32_t y = eval(f, n.b).u;
        if(y == 0)
          throw Error(Errc::internal, "kernel '" + f.ir.name + "': integer division by zero");
        r.u = n.op == Op::div_u32 ? x / y : x % y;
        return r;
      }
      case Op::neg_f64: r.f = -eval(f, n.a).f; return r;
      case Op::logical_not: r.b = !eval(f, n.a).b; return r;
      case Op::lt_f64: r.b = eval(f, n.a).f < eval(f, n.b).f; return r;
      case Op::le_f64: r.b = eval(f, n.a).f <= eval(f, n.b).f; return r;
      case Op::gt_f64: r.b = eval(f, n.a).f > eval(f, n.b).f; return r;
      case Op::ge_f64: r.b = eval(f, n.a).f >= eval(f, n.b).f; return r;
      case Op::eq_f64: r.b = eval(f, n.a).f == eval(f, n.b).f; return r;
      case Op::ne_f64: r.b = eval(f, n.a).f != eval(f, n.b).f; return r;
      case Op::lt_u32: r.b = eval(f, n.a).u < eval(f, n.b).u; return r;
      case Op::le_u32: r.b = eval(f, n.a).u <= eval(f, n.b).u; return r;
      case Op::gt_u32: r.b = eval(f, n.a).u > eval(f, n.b).u; return r;
      case Op::ge_u32: r.b = eval(f, n.a).u >= eval(f, n.b).u; return r;
      case Op::eq_u32: r.b = eval(f, n.a).u == eval(f, n.b).u; return r;
      case Op::ne_u32: r.b = eval(f, n.a).u != eval(f, n.b).u; return r;
      case Op::eq_bool: r.b = eval(f, n.a).b == eval(f, n.b).b; return r;
      case Op::ne_bool: r.b = eval(f, n.a).b != eval(f, n.b).b; return r;
      case Op::logical_and: r.b = eval(f, n.a).b && eval(f, n.b).b; return r;
      case Op::logical_or: r.b = eval(f, n.a).b || eval(f, n.b).b; return r;
      case Op::sin: r.f = std::sin(eval(f, n.a).f); return r;
      case Op::cos: r.f = std::cos(eval(f, n.a).f); return r;
      case Op::sqrt: r.f = std::sqrt(eval(f, n.a).f); return r;
      case Op::abs_f64: r.f = std::fabs(eval(f, n.a).f); return r;
      case Op::min_f64: {
        double x = eval(f, n.a).f, y = eval(f, n.b).f;
        r.f = y < x ? y : x;
        return r;
      }
      case Op::max_f64: {
        double x = eval(f, n.a).f, y = eval(f, n.b).f;
        r.f = x < y ? y : x;
        return r;
      }
      case Op::min_u32: {
        std::uint32_t x = eval(f, n.a).u, y = eval(f, n.b).u;
        r.u = y < x ? y : x;
        return r;
      }
      case Op::max_u32: {
        std::uint32_t x = eval(f, n.a).u, y = eval(f, n.b).u;
        r.u = x < y ? y : x;
        return r;
      }
      case Op::select:
        // only the chosen operand is evaluated
        return eval(f, n.a).b ? eval(f, n.b) : eval(f, n.c);
      case Op::u32_to_f64: r.f = double(eval(f, n.a).u); return r;
      case Op::f64_to_u32: r.u = to_u32(eval(f, n.a).f); return r;
      }
      throw Error(Errc::internal, "corrupt kernel IR");
    }

    enum class Flow { next, broke };

    Flow run_block(Frame& f, const std::vector<Stmt>& stmts)
    {
      for(const Stmt& s : stmts) {
        switch(s.kind) {
        case Stmt::Kind::let:
        case Stmt::Kind::assign:
          f.locals[s.target] = eval(f, s.expr);
          break;
        case Stmt::Kind::store: {
          std::uint32_t i = eval(f, s.index).u;
          Value v = eval(f, s.expr);
          const BoundArg& a = f.args[s.target];
          if(a.kind == ParamKind::buffer_f64) {
            std::size_t count = a.size_bytes / sizeof(double);
            if(i >= count)
              out_of_range(f, s.target, i, count);
            std::memcpy(a.data + std::size_t(i) * sizeof(double), &v.f, sizeof(double));
          } else {
            std::size_t count = a.size_bytes / sizeof(std::uint32_t);
            if(i >= count)
              out_of_range(f, s.target, i, count);
            std::memcpy(a.data + std::size_t(i) * sizeof(std::uint32_t), &v.u, sizeof(std::uint32_t));
          }
          break;
        }
        case Stmt::Kind::branch:
          if(eval(f, s.expr).b) {
            if(run_block(f, s.body) == Flow::broke)
              return Flow::broke;
          } else if(run_block(f, s.orelse) == Flow::broke) {
            return Flow::broke;
          }
          break;
        case Stmt::Kind::loop: {
          std::uint32_t bound = eval(f, s.expr).u;
          for(std::uint32_t i = 0; i < bound; i++) {
            f.locals[s.target].u = i;
            if(run_block(f, s.body) == Flow::broke)
              break;
          }
          break;
        }
        case Stmt::Kind::break_if:
          if(eval(f, s.expr).b)
            return Flow::broke;
          break;
        }
      }
      return Flow::next;
    }

    void check_args(const KernelIR& ir, std::span<const BoundArg> args)
    {
      if(args.size() != ir.params.size())
        throw Error(Errc::bad_args, "kernel '" + ir.name + "' expects " + std::to_string(ir.params.size()) +
                                        " arguments, got " + std::to_string(args.size()));
      for(std::size_t i = 0; i < args.size(); i++) {
        if(args[i].kind != ir.params[i].kind)
          throw Error(Errc::bad_args, "argument " + std::to_string(i) + " of kernel '" + ir.name + "' must be " +
                                          std::string(to_string(ir.params[i].kind)) + ", got " +
                                          std::string(to_string(args[i].kind)));
        if(is_buffer(args[i].kind) && args[i].data == nullptr && args[i].size_bytes != 0)
          throw Error(Errc::bad_args, "argument " + std::to_string(i) + " has no storage");
      }
    }

  }; // namespace

  std::uint64_t execute(const KernelIR& ir, std::span<const BoundArg> args, const Dim3& grid, const Dim3& block,
                        const ParallelFor& parallel)
  {
    check_args(ir, args);
    std::uint64_t total = check_launch(grid, block);
    const std::uint64_t block_volume = block.volume();

    std::atomic<std::uint64_t> executed{0};
    std::atomic<bool> aborted{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
      std::vector<Value> locals(ir.slot_count);
      Frame f{ir, args, locals.data(), 0, {}};
      const std::uint32_t grid_dims[3] = {grid.x, grid.y, grid.z};
      const std::uint32_t block_dims[3] = {block.x, block.y, block.z};
      for(int c = 0; c < 3; c++) {
        f.dims[std::size_t(Builtin::grid_dim)][c] = grid_dims[c];
        f.dims[std::size_t(Builtin::block_dim)][c] = block_dims[c];
      }
      std::uint64_t done = 0;
      try {
        for(std::uint64_t item = begin; item < end; item++) {
          if(aborted.load(std::memory_order_relaxed))
            break;
          std::uint64_t b = item / block_volume;
          std::uint64_t t = item % block_volume;
          auto& bi = f.dims[std::size_t(Builtin::block_idx)];
          auto& ti = f.dims[std::size_t(Builtin::thread_idx)];
          bi[0] = std::uint32_t(b % grid.x);
          bi[1] = std::uint32_t((b / grid.x) % grid.y);
          bi[2] = std::uint32_t(b / (std::uint64_t(grid.x) * grid.y));
          ti[0] = std::uint32_t(t % block.x);
          ti[1] = std::uint32_t((t / block.x) % block.y);
          ti[2] = std::uint32_t(t / (std::uint64_t(block.x) * block.y));
          f.gtid = std::uint32_t(item);
          run_block(f, ir.body);
          done++;
        }
      } catch(...) {
        aborted.store(true);
        std::lock_guard<std::mutex> lock(error_mutex);
        if(!first_error)
          first_error = std::current_exception();
      }
      executed.fetch_add(done, std::memory_order_relaxed);
    };

    if(parallel)
      parallel(total, run_range);
    else
      run_range(0, total);

    if(first_error)
      std::rethrow_exception(first_error);
    return executed.load();
  }

}; // namespace offload::kernel
