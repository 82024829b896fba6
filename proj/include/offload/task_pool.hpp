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

#ifndef OFFLOAD_TASK_POOL_HPP
#define OFFLOAD_TASK_POOL_HPP

#include "offload/futures.hpp"

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace offload {

  // Fixed set of worker threads draining one FIFO queue. Destruction runs
  //  every task already posted, then joins.
  class TaskPool {
  public:
    explicit TaskPool(std::size_t threads);
    ~TaskPool();

    TaskPool(const TaskPool&) = delete;
    TaskPool& operator=(const TaskPool&) = delete;

    void post(std::function<void()> task);

    std::size_t size() const { return workers_.size(); }

    bool on_worker_thread() const;

    std::vector<std::thread::id> thread_ids() const;

  private:
    void worker_loop();

    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<std::function<void()>> queue_;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
  };

  // hpx::async analog: runs f on the pool and returns a token for its result.
  template <typename F>
  auto async(TaskPool& pool, F&& f)
  {
    using R = std::invoke_result_t<std::decay_t<F>&>;
    using W = typename detail::continuation_value<R>::type;
    auto target = std::make_shared<Promise<W>>();
    auto result = target->get_token();
    pool.post([target, f = std::forward<F>(f)]() mutable { detail::fulfill(target, f); });
    return result;
  }

  inline std::size_t default_worker_count()
  {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
  }

}; // namespace offload

#endif
