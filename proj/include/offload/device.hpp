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

#ifndef OFFLOAD_DEVICE_HPP
#define OFFLOAD_DEVICE_HPP

#include "offload/futures.hpp"
#include "offload/kernel.hpp"
#include "offload/registry.hpp"
#include "offload/task_pool.hpp"
#include "offload/types.hpp"

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string_view>
#include <thread>
#include <vector>

namespace offload {

  enum class BackendKind : std::uint8_t { host, sim };

  std::string_view to_string(BackendKind kind);
  BackendKind parse_backend(std::string_view name); // throws Error(invalid_config)

  // Cost model of the simulated backend. Times in microseconds, bandwidth in
  //  bytes per microsecond.
  struct SimProfile {
    double copy_latency = 10.0;
    double bandwidth = 6000.0;
    double kernel_latency = 5.0;
    double per_item_cost = 0.0005;
    std::uint32_t copy_engines_per_direction = 1;
    std::uint32_t compute_engines = 1;

    void validate() const; // throws Error(invalid_config) unless all > 0
  };

  // key=value lines; '#' starts a comment. Unset keys keep their defaults.
  SimProfile parse_sim_profile(std::string_view text);
  SimProfile load_sim_profile(const std::filesystem::path& path);

  // One device per line: "name major minor memory_bytes compute_units".
  std::vector<DeviceInfo> parse_device_fixture(std::string_view text);
  std::vector<DeviceInfo> load_device_fixture(const std::filesystem::path& path);

  enum class OpKind : std::uint8_t { write, read, kernel };
  enum class EngineClass : std::uint8_t { copy_in, copy_out, compute };

  std::string_view to_string(OpKind kind);
  EngineClass engine_class(OpKind kind);

  struct OpCost {
    OpKind kind;
    std::uint64_t amount = 0; // bytes for copies, work items for kernels
  };

  double op_duration(const SimProfile& profile, const OpCost& cost);

  // Where an operation lands on the virtual timeline.
  struct Placement {
    std::uint32_t engine = 0;
    double start = 0.0;
    double end = 0.0;
  };

  // Timing side of a backend. schedule() is called under the device lock, in
  //  enqueue order.
  class ExecutionModel {
  public:
    virtual ~ExecutionModel() = default;
    virtual BackendKind kind() const = 0;
    virtual Placement schedule(StreamId stream, const OpCost& cost) = 0;
    // completion time of everything scheduled so far
    virtual double makespan() const = 0;
    // work scheduled after a fence starts no earlier than the current makespan
    virtual void fence() = 0;
  };

  // Real execution only; the virtual timeline stays at zero.
  class HostModel final : public ExecutionModel {
  public:
    BackendKind kind() const override { return BackendKind::host; }
    Placement schedule(StreamId, const OpCost&) override { return {}; }
    double makespan() const override { return 0.0; }
    void fence() override {}
  };

  // Virtual clock per engine. Operations of one engine class issue in enqueue
  //  order; each starts at the latest of: its stream predecessor's end, the
  //  earliest-free engine of its class, the previous issue of its class, and
  //  the last fence. It then occupies that engine for op_duration().
  class SimModel final : public ExecutionModel {
  public:
    explicit SimModel(SimProfile profile);

    BackendKind kind() const override { return BackendKind::sim; }
    Placement schedule(StreamId stream, const OpCost& cost) override;
    double makespan() const override { return makespan_; }
    void fence() override { floor_ = makespan_; }

    const SimProfile& profile() const { return profile_; }

  private:
    SimProfile profile_;
    std::vector<double> engine_free_[3];
    double last_issue_[3] = {0.0, 0.0, 0.0};
    std::map<std::uint32_t, double> stream_ready_;
    double floor_ = 0.0;
    double makespan_ = 0.0;
  };

  struct DeviceEvent {
    std::uint64_t seq = 0;        // enqueue order on this device
    std::uint64_t exec_order = 0; // order in which the dispatcher ran it
    StreamId stream;
    OpKind kind = OpKind::write;
    std::uint64_t amount = 0;
    std::uint64_t work_items = 0; // kernel bodies actually executed
    Placement placement;
    std::int64_t wall_start_ns = 0;
    std::int64_t wall_end_ns = 0;
    std::thread::id worker;
    bool failed = false;
  };

  // Passed to work running on the dispatcher.
  struct OpContext {
    std::uint64_t work_items = 0;
  };

  // Server side of a device: owns the stream queues, the dispatcher thread
  //  that drains them, and any helper threads used for kernel work items.
  //  Nothing scheduled here ever runs on another device's threads.
  class DeviceServer final : public Object {
  public:
    DeviceServer(DeviceInfo info, BackendKind backend, SimProfile profile = {},
                 std::size_t compute_workers = 1);
    ~DeviceServer() override;

    DeviceServer(const DeviceServer&) = delete;
    DeviceServer& operator=(const DeviceServer&) = delete;

    ObjectKind kind() const override { return ObjectKind::device; }

    const DeviceInfo& info() const { return info_; }
    BackendKind backend() const { return model_->kind(); }

    StreamId create_stream();
    bool has_stream(StreamId stream) const;

    // Queues work on a stream. Work on one stream runs in enqueue order on the
    //  dispatcher; the token completes after the event is logged.
    template <typename T>
    Token<T> submit(StreamId stream, OpCost cost, std::function<T(OpContext&)> work)
    {
      auto promise = std::make_shared<Promise<T>>();
      auto token = promise->get_token();
      auto result = std::make_shared<std::optional<T>>();
      Op op;
      op.cost = cost;
      op.execute = [result, work = std::move(work)](OpContext& ctx) { result->emplace(work(ctx)); };
      op.complete = [promise, result](std::exception_ptr error) {
        if(error)
          promise->try_set_error(error);
        else
          promise->try_set_value(std::move(**result));
      };
      try {
        enqueue(stream, std::move(op));
      } catch(...) {
        promise->try_set_error(std::current_exception());
      }
      return token;
    }

    Token<Unit> submit(StreamId stream, OpCost cost, std::function<void(OpContext&)> work)
    {
      return submit<Unit>(stream, cost, [work = std::move(work)](OpContext& ctx) {
        work(ctx);
        return Unit{};
      });
    }

    // Completes with the virtual time at which all work enqueued before the
    //  call has finished, once it really has. Later work is fenced behind it.
    Token<double> synchronize();

    void reserve_memory(std::uint64_t bytes); // throws Error(out_of_memory)
    void release_memory(std::uint64_t bytes);
    std::uint64_t memory_in_use() const;

    // events in enqueue order
    std::vector<DeviceEvent> events() const;
    void clear_events();
    double virtual_makespan() const;

    std::thread::id dispatcher_thread() const { return dispatcher_.get_id(); }
    std::vector<std::thread::id> worker_threads() const;

    // runs a range split across the dispatcher and this device's helpers
    void parallel_for(std::uint64_t count, const std::function<void(std::uint64_t, std::uint64_t)>& body);

  private:
    struct Op {
      std::uint64_t seq = 0;
      StreamId stream;
      OpCost cost;
      Placement placement;
      std::function<void(OpContext&)> execute;
      std::function<void(std::exception_ptr)> complete;
    };

    struct SyncWaiter {
      std::uint64_t threshold;
      double virtual_time;
      Promise<double> promise;
    };

    void enqueue(StreamId stream, Op op);
    void dispatch_loop();

    DeviceInfo info_;
    std::unique_ptr<ExecutionModel> model_;

    mutable std::mutex mutex_;
    std::condition_variable work_cv_;
    std::vector<std::deque<Op>> streams_; // index = StreamId::index
    std::size_t queued_ = 0;
    std::size_t rr_cursor_ = 0;
    bool stopping_ = false;
    std::uint64_t next_seq_ = 0;
    std::uint64_t exec_counter_ = 0;
    std::set<std::uint64_t> outstanding_;
    std::vector<SyncWaiter> waiters_;
    std::vector<DeviceEvent> events_;
    std::uint64_t memory_in_use_ = 0;

    std::unique_ptr<TaskPool> helpers_;
    std::thread dispatcher_;
  };

}; // namespace offload

#endif
