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

#include "offload/device.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

namespace offload {

  std::string_view to_string(BackendKind kind)
  {
    return kind == BackendKind::host ? "host" : "sim";
  }

  BackendKind parse_backend(std::string_view name)
  {
    if(name == "host")
      return BackendKind::host;
    if(name == "sim")
      return BackendKind::sim;
    throw Error(Errc::invalid_config, "unknown backend '" + std::string(name) + "'");
  }

  void SimProfile::validate() const
  {
    if(!(copy_latency > 0.0) || !(bandwidth > 0.0) || !(kernel_latency > 0.0) ||
       !(per_item_cost > 0.0) || copy_engines_per_direction == 0 || compute_engines == 0)
      throw Error(Errc::invalid_config, "sim profile values must be strictly positive");
  }

  namespace {

    std::string_view trim(std::string_view s)
    {
      while(!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
      while(!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
      return s;
    }

    std::string read_file(const std::filesystem::path& path)
    {
      std::ifstream in(path, std::ios::binary);
      if(!in)
        throw Error(Errc::io_error, "cannot open " + path.string());
      std::ostringstream os;
      os << in.rdbuf();
      return os.str();
    }

    template <typename T>
    T parse_number(std::string_view text, std::size_t line, std::string_view what)
    {
      T value{};
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if(ec != std::errc{} || ptr != text.data() + text.size())
        throw Error(Errc::invalid_config, "line " + std::to_string(line) + ": bad " +
                                              std::string(what) + " '" + std::string(text) + "'");
      return value;
    }

    std::int64_t now_ns()
    {
      return std::chrono::duration_cast<std::chrono::nanoseconds>(
                 std::chrono::steady_clock::now().time_since_epoch())
          .count();
    }

  };

  SimProfile parse_sim_profile(std::string_view text)
  {
    SimProfile p;
    std::size_t line_no = 0;
    while(!text.empty()) {
      auto nl = text.find('\n');
      std::string_view line = text.substr(0, nl);
      text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
      ++line_no;
      if(auto hash = line.find('#'); hash != std::string_view::npos)
        line = line.substr(0, hash);
      line = trim(line);
      if(line.empty())
        continue;
      auto eq = line.find('=');
      if(eq == std::string_view::npos)
        throw Error(Errc::invalid_config, "line " + std::to_string(line_no) + ": expected key=value");
      auto key = trim(line.substr(0, eq));
      auto value = trim(line.substr(eq + 1));
      if(key == "copy_latency")
        p.copy_latency = parse_number<double>(value, line_no, key);
      else if(key == "bandwidth")
        p.bandwidth = parse_number<double>(value, line_no, key);
      else if(key == "kernel_latency")
        p.kernel_latency = parse_number<double>(value, line_no, key);
      else if(key == "per_item_cost")
        p.per_item_cost = parse_number<double>(value, line_no, key);
      else if(key == "copy_engines_per_direction")
        p.copy_engines_per_direction = parse_number<std::uint32_t>(value, line_no, key);
      else if(key == "compute_engines")
        p.compute_engines = parse_number<std::uint32_t>(value, line_no, key);
      else
        throw Error(Errc::invalid_config,
                    "line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
    p.validate();
    return p;
  }

  SimProfile load_sim_profile(const std::filesystem::path& path)
  {
    return parse_sim_profile(read_file(path));
  }

  std::vector<DeviceInfo> parse_device_fixture(std::string_view text)
  {
    std::vector<DeviceInfo> out;
    std::size_t line_no = 0;
    while(!text.empty()) {
      auto nl = text.find('\n');
      std::string_view line = text.substr(0, nl);
      text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
      ++line_no;
      if(auto hash = line.find('#'); hash != std::string_view::npos)
        line = line.substr(0, hash);
      line = trim(line);
      if(line.empty())
        continue;
      std::vector<std::string_view> fields;
      while(!line.empty()) {
        auto end = std::find_if(line.begin(), line.end(),
                                [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
        fields.emplace_back(line.data(), std::size_t(end - line.begin()));
        line = trim(line.substr(fields.back().size()));
      }
      if(fields.size() != 5)
        throw Error(Errc::invalid_config, "line " + std::to_string(line_no) +
                                              ": expected 'name major minor memory_bytes compute_units'");
      DeviceInfo info;
      info.name = std::string(fields[0]);
      info.capability.major = parse_number<std::uint32_t>(fields[1], line_no, "major");
      info.capability.minor = parse_number<std::uint32_t>(fields[2], line_no, "minor");
      info.memory_bytes = parse_number<std::uint64_t>(fields[3], line_no, "memory_bytes");
      info.compute_units = parse_number<std::uint32_t>(fields[4], line_no, "compute_units");
      out.push_back(std::move(info));
    }
    return out;
  }

  std::vector<DeviceInfo> load_device_fixture(const std::filesystem::path& path)
  {
    return parse_device_fixture(read_file(path));
  }

  std::string_view to_string(OpKind kind)
  {
    switch(kind) {
    case OpKind::write:
      return "write";
    case OpKind::read:
      return "read";
    case OpKind::kernel:
      return "kernel";
    }
    return "?";
  }

  EngineClass engine_class(OpKind kind)
  {
    switch(kind) {
    case OpKind::write:
      return EngineClass::copy_in;
    case OpKind::read:
      return EngineClass::copy_out;
    case OpKind::kernel:
      break;
    }
    return EngineClass::compute;
  }

  double op_duration(const SimProfile& profile, const OpCost& cost)
  {
    if(cost.kind == OpKind::kernel)
      return profile.kernel_latency + double(cost.amount) * profile.per_item_cost;
    return profile.copy_latency + double(cost.amount) / profile.bandwidth;
  }

  SimModel::SimModel(SimProfile profile)
    : profile_(profile)
  {
    profile_.validate();
    engine_free_[0].assign(profile_.copy_engines_per_direction, 0.0);
    engine_free_[1].assign(profile_.copy_engines_per_direction, 0.0);
    engine_free_[2].assign(profile_.compute_engines, 0.0);
  }

  Placement SimModel::schedule(StreamId stream, const OpCost& cost)
  {
    auto cls = std::size_t(engine_class(cost.kind));
    auto& engines = engine_free_[cls];
    auto engine = std::size_t(std::min_element(engines.begin(), engines.end()) - engines.begin());

    double start = std::max({floor_, engines[engine], last_issue_[cls]});
    if(auto it = stream_ready_.find(stream.index); it != stream_ready_.end())
      start = std::max(start, it->second);
    double end = start + op_duration(profile_, cost);

    engines[engine] = end;
    last_issue_[cls] = start;
    stream_ready_[stream.index] = end;
    makespan_ = std::max(makespan_, end);
    return Placement{std::uint32_t(engine), start, end};
  }

  DeviceServer::DeviceServer(DeviceInfo info, BackendKind backend, SimProfile profile,
                             std::size_t compute_workers)
    : info_(std::move(info))
  {
    if(backend == BackendKind::sim)
      model_ = std::make_unique<SimModel>(profile);
    else
      model_ = std::make_unique<HostModel>();
    streams_.emplace_back(); // default stream
    if(compute_workers > 1)
      helpers_ = std::make_unique<TaskPool>(compute_workers - 1);
    dispatcher_ = std::thread([this] { dispatch_loop(); });
  }

  DeviceServer::~DeviceServer()
  {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    work_cv_.notify_all();
    // queued work never owns its device, so this is not the dispatcher itself
    if(dispatcher_.joinable())
      dispatcher_.join();
  }

  StreamId DeviceServer::create_stream()
  {
    std::lock_guard lock(mutex_);
    streams_.emplace_back();
    return StreamId{std::uint32_t(streams_.size() - 1)};
  }

  bool DeviceServer::has_stream(StreamId stream) const
  {
    std::lock_guard lock(mutex_);
    return stream.index < streams_.size();
  }

  void DeviceServer::enqueue(StreamId stream, Op op)
  {
    {
      std::lock_guard lock(mutex_);
      if(stream.index >= streams_.size())
        throw Error(Errc::bad_args, "unknown stream " + std::to_string(stream.index));
      if(stopping_)
        throw Error(Errc::internal, "device is shutting down");
      op.seq = next_seq_++;
      op.stream = stream;
      op.placement = model_->schedule(stream, op.cost);
      outstanding_.insert(op.seq);
      streams_[stream.index].push_back(std::move(op));
      ++queued_;
    }
    work_cv_.notify_one();
  }

  Token<double> DeviceServer::synchronize()
  {
    std::lock_guard lock(mutex_);
    double vt = model_->makespan();
    model_->fence();
    if(outstanding_.empty())
      return make_ready(vt);
    SyncWaiter w{next_seq_, vt, Promise<double>{}};
    auto token = w.promise.get_token();
    waiters_.push_back(std::move(w));
    return token;
  }

  void DeviceServer::dispatch_loop()
  {
    for(;;) {
      Op op;
      {
        std::unique_lock lock(mutex_);
        work_cv_.wait(lock, [this] { return queued_ > 0 || stopping_; });
        if(queued_ == 0)
          return;
        // round-robin over streams so none starves
        std::size_t n = streams_.size();
        for(std::size_t i = 0; i < n; ++i) {
          auto& q = streams_[(rr_cursor_ + i) % n];
          if(!q.empty()) {
            op = std::move(q.front());
            q.pop_front();
            rr_cursor_ = (rr_cursor_ + i + 1) % n;
            break;
          }
        }
        --queued_;
      }

      DeviceEvent ev;
      ev.seq = op.seq;
      ev.stream = op.stream;
      ev.kind = op.cost.kind;
      ev.amount = op.cost.amount;
      ev.placement = op.placement;
      ev.worker = std::this_thread::get_id();

      OpContext ctx;
      ctx.work_items = op.cost.kind == OpKind::kernel ? 0 : op.cost.amount;
      std::exception_ptr error;
      ev.wall_start_ns = now_ns();
      try {
        op.execute(ctx);
      } catch(...) {
        error = std::current_exception();
      }
      ev.wall_end_ns = now_ns();
      ev.work_items = ctx.work_items;
      ev.failed = bool(error);

      std::vector<SyncWaiter> ready;
      {
        std::lock_guard lock(mutex_);
        ev.exec_order = exec_counter_++;
        events_.push_back(ev);
        outstanding_.erase(op.seq);
        std::uint64_t oldest = outstanding_.empty() ? next_seq_ : *outstanding_.begin();
        auto split = std::partition(waiters_.begin(), waiters_.end(),
                                    [oldest](const SyncWaiter& w) { return oldest < w.threshold; });
        std::move(split, waiters_.end(), std::back_inserter(ready));
        waiters_.erase(split, waiters_.end());
      }
      op.complete(error);
      for(auto& w : ready)
        w.promise.set_value(w.virtual_time);
      op = Op{};
    }
  }

  void DeviceServer::reserve_memory(std::uint64_t bytes)
  {
    std::lock_guard lock(mutex_);
    if(bytes > info_.memory_bytes || memory_in_use_ > info_.memory_bytes - bytes)
      throw Error(Errc::out_of_memory, std::to_string(bytes) + " bytes requested on " + info_.name +
                                           ", " + std::to_string(info_.memory_bytes - memory_in_use_) +
                                           " available");
    memory_in_use_ += bytes;
  }

  void DeviceServer::release_memory(std::uint64_t bytes)
  {
    std::lock_guard lock(mutex_);
    memory_in_use_ -= std::min(bytes, memory_in_use_);
  }

  std::uint64_t DeviceServer::memory_in_use() const
  {
    std::lock_guard lock(mutex_);
    return memory_in_use_;
  }

  std::vector<DeviceEvent> DeviceServer::events() const
  {
    std::vector<DeviceEvent> out;
    {
      std::lock_guard lock(mutex_);
      out = events_;
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.seq < b.seq; });
    return out;
  }

  void DeviceServer::clear_events()
  {
    std::lock_guard lock(mutex_);
    events_.clear();
  }

  double DeviceServer::virtual_makespan() const
  {
    std::lock_guard lock(mutex_);
    return model_->makespan();
  }

  std::vector<std::thread::id> DeviceServer::worker_threads() const
  {
    std::vector<std::thread::id> ids{dispatcher_.get_id()};
    if(helpers_) {
      auto more = helpers_->thread_ids();
      ids.insert(ids.end(), more.begin(), more.end());
    }
    return ids;
  }

  void DeviceServer::parallel_for(std::uint64_t count,
                                  const std::function<void(std::uint64_t, std::uint64_t)>& body)
  {
    std::size_t helpers = helpers_ ? helpers_->size() : 0;
    if(helpers == 0 || count < 4096) {
      if(count > 0)
        body(0, count);
      return;
    }
    std::uint64_t chunk = std::max<std::uint64_t>(1024, count / ((helpers + 1) * 8));
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr first_error;
    std::mutex done_mutex;
    std::condition_variable done_cv;
    std::size_t running = helpers;

    auto drain = [&] {
      try {
        for(;;) {
          std::uint64_t begin = next.fetch_add(chunk);
          if(begin >= count)
            break;
          body(begin, std::min(begin + chunk, count));
        }
      } catch(...) {
        next.store(count);
        std::lock_guard lock(done_mutex);
        if(!first_error)
          first_error = std::current_exception();
      }
    };
    for(std::size_t i = 0; i < helpers; ++i)
      helpers_->post([&] {
        drain();
        std::lock_guard lock(done_mutex);
        if(--running == 0)
          done_cv.notify_all();
      });
    drain();
    std::unique_lock lock(done_mutex);
    done_cv.wait(lock, [&] { return running == 0; });
    if(first_error)
      std::rethrow_exception(first_error);
  }

}; // namespace offload
