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

#include "offload/task_pool.hpp"

#include <algorithm>

namespace offload {

  TaskPool::TaskPool(std::size_t threads)
  {
    workers_.reserve(threads);
    for(std::size_t i = 0; i < threads; i++)
      workers_.emplace_back([this] { worker_loop(); });
  }

  TaskPool::~TaskPool()
  {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      stopping_ = true;
    }
    cv_.notify_all();
    for(auto& t : workers_)
      t.join();
  }

  void TaskPool::post(std::function<void()> task)
  {
    if(workers_.empty()) {
      task();
      return;
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      queue_.push_back(std::move(task));
    }
    cv_.notify_one();
  }

  bool TaskPool::on_worker_thread() const
  {
    auto self = std::this_thread::get_id();
    return std::any_of(workers_.begin(), workers_.end(),
                       [&](const std::thread& t) { return t.get_id() == self; });
  }

  std::vector<std::thread::id> TaskPool::thread_ids() const
  {
    std::vector<std::thread::id> ids;
    for(const auto& t : workers_)
      ids.push_back(t.get_id());
    return ids;
  }

  void TaskPool::worker_loop()
  {
    for(;;) {
      std::function<void()> task;
      {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if(queue_.empty())
          return;
        task = std::move(queue_.front());
        queue_.pop_front();
      }
      task();
    }
  }

}; // namespace offload
