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

// The kernel language and its interpreter.
//
//   kernel <name>(<param> : <kind>, ...) { <stmt>* }
//
//   kinds  buffer_f64 | buffer_u32 | scalar_f64 | scalar_u32
//   stmts  let x = e;   x = e;   buf[e] = e;   break if (e);
//          if (e) { ... } [else { ... } | else if ...]
//          for i in 0 .. e { ... }          (bound evaluated once, on entry)
//   exprs  f64 / u32 literals, locals, scalar params, buf[e],
//          gtid, block_idx, thread_idx, grid_dim, block_dim (.x/.y/.z,
//          bare name means .x), + - * / %, comparisons, && ||, !, unary -,
//          sin cos sqrt abs min max, select(c, a, b), f64(x), u32(x)
//
// Types are f64, u32 and bool with no implicit conversions, except that an
//  integer literal adopts f64 where an f64 operand is required. Buffer
//  indices count elements, not bytes. Loops are bounded and there is no
//  recursion, so every kernel terminates.
//
// Work items may only write buffer elements that no other work item touches;
//  cross-item accumulation is done by the single work item with gtid == 0.
//  Kernels that follow this rule produce identical results for any number of
//  workers.

#ifndef OFFLOAD_KERNEL_HPP
#define OFFLOAD_KERNEL_HPP

#include "offload/types.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace offload::kernel {

  enum class ParamKind : std::uint8_t { buffer_f64, buffer_u32, scalar_f64, scalar_u32 };

  enum class ValueType : std::uint8_t { f64, u32, boolean };

  std::string_view to_string(ParamKind kind);
  std::string_view to_string(ValueType type);

  inline bool is_buffer(ParamKind k) { return k == ParamKind::buffer_f64 || k == ParamKind::buffer_u32; }

  struct Param {
    std::string name;
    ParamKind kind;
  };

  struct Value {
    union {
      double f;
      std::uint32_t u;
      bool b;
    };
    Value()
      : f(0.0)
    {}
  };

  enum class Op : std::uint8_t {
    const_value,
    local,
    param,
    builtin,
    load_f64,
    load_u32,
    add_f64, sub_f64, mul_f64, div_f64,
    add_u32, sub_u32, mul_u32, div_u32, mod_u32,
    neg_f64,
    logical_not,
    lt_f64, le_f64, gt_f64, ge_f64, eq_f64, ne_f64,
    lt_u32, le_u32, gt_u32, ge_u32, eq_u32, ne_u32,
    eq_bool, ne_bool,
    logical_and, logical_or,
    sin, cos, sqrt, abs_f64,
    min_f64, max_f64, min_u32, max_u32,
    select,
    u32_to_f64,
    f64_to_u32,
  };

  enum class Builtin : std::uint8_t { gtid, block_idx, thread_idx, grid_dim, block_dim };

  // One expression node. Operands a, b, c index KernelIR::nodes except for
  //  local (a = slot), param (a = param index), builtin (a = Builtin,
  //  b = component) and loads (a = param index, b = index node).
  struct Node {
    Node(Op op, ValueType type)
      : op(op)
      , type(type)
    {}

    Op op;
    ValueType type;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::uint32_t c = 0;
    Value imm;
  };

  struct Stmt {
    enum class Kind : std::uint8_t { let, assign, store, branch, loop, break_if };

    explicit Stmt(Kind kind)
      : kind(kind)
    {}

    Kind kind;
    std::uint32_t target = 0; // local slot, or buffer param index for store
    std::uint32_t expr = 0;   // value, condition or loop bound
    std::uint32_t index = 0;  // store index
    std::vector<Stmt> body;
    std::vector<Stmt> orelse;
  };

  // Validated form of one kernel: every identifier resolved to a slot or
  //  parameter, every expression typed.
  struct KernelIR {
    std::string name;
    std::vector<Param> params;
    std::vector<Node> nodes;
    std::vector<Stmt> body;
    std::uint32_t slot_count = 0;
  };

  // Parses and validates every kernel in source. Throws Error(compile_error)
  //  whose detail is "line:col: message".
  std::vector<KernelIR> compile(std::string_view source);

  // compile() plus lookup; a missing name is a compile error too
  KernelIR compile_kernel(std::string_view source, std::string_view name);

  // A kernel argument bound to storage (buffers) or a value (scalars).
  struct BoundArg {
    ParamKind kind;
    std::uint8_t* data = nullptr;
    std::size_t size_bytes = 0;
    Value scalar;
  };

  // Splits [0, count) into ranges and runs body over each; the default runs
  //  everything on the calling thread.
  using ParallelFor =
      std::function<void(std::uint64_t count, const std::function<void(std::uint64_t, std::uint64_t)>& body)>;

  // throws Error(launch_config) unless every extent is >= 1 and the total
  //  work-item count fits in 2^32
  std::uint64_t check_launch(const Dim3& grid, const Dim3& block);

  // Runs the kernel body once per work item and returns the number of work
  //  items executed. Throws Error(oob_access) on an out-of-range buffer index
  //  and Error(bad_args) when args do not match the parameter list.
  std::uint64_t execute(const KernelIR& ir, std::span<const BoundArg> args, const Dim3& grid,
                        const Dim3& block, const ParallelFor& parallel = {});

}; // namespace offload::kernel

#endif
