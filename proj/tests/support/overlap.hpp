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

// Pipelined copy-in / kernel / copy-out over p streams on one simulated
//  device, checked against the event-driven replay in oracles.hpp.

#ifndef OFFLOAD_TESTS_OVERLAP_HPP
#define OFFLOAD_TESTS_OVERLAP_HPP

#include "support/oracles.hpp"
#include "support/util.hpp"

#include "offload/bench.hpp"
#include "offload/runtime.hpp"

#include <algorithm>

namespace overlap {

  using namespace offload;

  struct Result {
    std::size_t ops = 0;
    std::size_t mismatches = 0; // ops whose start or end differ from the replay
    double makespan = 0.0;
    double oracle_makespan = 0.0;
    double copy_in = 0.0, compute = 0.0, copy_out = 0.0; // per-partition stage times
    std::vector<Placement> timeline;
    bool outputs_ok = false;
  };

  inline double stage_time(const SimProfile& s, OpKind kind, std::uint64_t amount)
  {
    if(kind == OpKind::kernel)
      return s.kernel_latency + double(amount) * s.per_item_cost;
    return s.copy_latency + double(amount) / s.bandwidth;
  }

  // serialized puts every partition on the default stream instead
  inline Result run(std::uint32_t partitions, std::uint64_t elems, const SimProfile& profile = {},
                    bool serialized = false)
  {
    RuntimeOptions opts;
    opts.backend = BackendKind::sim;
    opts.profile = profile;
    opts.pool_threads = 1;
    opts.compute_workers = 1;
    Runtime rt(opts);
    Device dev = rt.get_all_devices(0, 0).get().at(0);
    Program prog = dev.create_program_with_source(bench::partition_source).get();
    prog.build("partition").get();

    std::vector<StreamId> streams;
    std::vector<Buffer> bufs;
    for(std::uint32_t i = 0; i < partitions; ++i) {
      streams.push_back(serialized ? default_stream : dev.create_stream().get());
      bufs.push_back(dev.create_buffer(elems * sizeof(double)).get());
    }
    std::uint32_t block = 256;
    Dim3 grid{std::uint32_t((elems + block - 1) / block), 1, 1};
    std::vector<Token<Unit>> done;
    std::vector<Token<Bytes>> reads;
    Bytes zeros(elems * sizeof(double), 0);
    for(std::uint32_t i = 0; i < partitions; ++i) {
      done.push_back(bufs[i].enqueue_write(0, zeros, streams[i]));
      done.push_back(prog.run({bufs[i], std::uint32_t(i * elems), std::uint32_t(elems)}, "partition", grid,
                              {block, 1, 1}, streams[i]));
      reads.push_back(bufs[i].enqueue_read(0, elems * sizeof(double), streams[i]));
    }
    wait_all(done);
    Result r;
    r.outputs_ok = true;
    for(auto& t : reads)
      r.outputs_ok = r.outputs_ok && oracle::partition_ok(testing::from_bytes<double>(t.get()));
    r.makespan = dev.synchronize_clock().get();

    auto events = rt.device_server(dev)->events();
    std::vector<oracle::Job> jobs;
    for(auto& e : events) {
      int cls = e.kind == OpKind::write ? 0 : e.kind == OpKind::read ? 1 : 2;
      jobs.push_back({e.stream.index, cls, stage_time(profile, e.kind, e.amount)});
      r.timeline.push_back(e.placement);
      if(e.kind == OpKind::write)
        r.copy_in = jobs.back().duration;
      else if(e.kind == OpKind::read)
        r.copy_out = jobs.back().duration;
      else
        r.compute = jobs.back().duration;
    }
    std::uint32_t engines[3] = {profile.copy_engines_per_direction, profile.copy_engines_per_direction,
                                profile.compute_engines};
    auto slots = oracle::replay(jobs, engines);
    r.ops = events.size();
    for(std::size_t i = 0; i < events.size(); ++i)
      if(slots[i].start != events[i].placement.start || slots[i].end != events[i].placement.end)
        ++r.mismatches;
    r.oracle_makespan = oracle::makespan(slots);
    return r;
  }

  // the pipelined bound for p identical partitions
  inline double pipeline_bound(const Result& r, std::uint32_t p)
  {
    double sum = r.copy_in + r.compute + r.copy_out;
    return sum + (p - 1) * std::max({r.copy_in, r.compute, r.copy_out});
  }

  // the bound is exact in real arithmetic; allow for summation order
  inline bool within_pipeline_bound(const Result& r, std::uint32_t p)
  {
    double bound = pipeline_bound(r, p);
    return r.makespan <= bound * (1 + 1e-12);
  }

  inline bool same_timeline(const Result& a, const Result& b)
  {
    if(a.timeline.size() != b.timeline.size())
      return false;
    for(std::size_t i = 0; i < a.timeline.size(); ++i)
      if(a.timeline[i].start != b.timeline[i].start || a.timeline[i].end != b.timeline[i].end ||
         a.timeline[i].engine != b.timeline[i].engine)
        return false;
    return true;
  }

}; // namespace overlap

#endif
