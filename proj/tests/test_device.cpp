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

#include "support/oracles.hpp"
#include "support/overlap.hpp"
#include "support/stream_props.hpp"
#include "support/util.hpp"

#include "offload/buffer.hpp"
#include "offload/device.hpp"
#include "offload/runtime.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace offload;
using testing::error_code;
using testing::thrown_code;

namespace {

  DeviceInfo info(std::string name = "d", std::uint64_t mem = 1 << 20)
  {
    return DeviceInfo{std::move(name), {1, 0}, mem, 1};
  }

}; // namespace

TEST_CASE("sim profile text")
{
  auto p = parse_sim_profile("# cost model\ncopy_latency = 2\n bandwidth=100 # B/us\n\ncompute_engines=2\n");
  CHECK(p.copy_latency == 2.0);
  CHECK(p.bandwidth == 100.0);
  CHECK(p.kernel_latency == 5.0);
  CHECK(p.compute_engines == 2);
  CHECK(thrown_code([] { parse_sim_profile("latency=1\n"); }) == Errc::invalid_config);
  CHECK(thrown_code([] { parse_sim_profile("bandwidth=0\n"); }) == Errc::invalid_config);
  CHECK(thrown_code([] { parse_sim_profile("bandwidth=-3\n"); }) == Errc::invalid_config);
  CHECK(thrown_code([] { parse_sim_profile("bandwidth=fast\n"); }) == Errc::invalid_config);
  CHECK(thrown_code([] { parse_sim_profile("bandwidth\n"); }) == Errc::invalid_config);
  CHECK(thrown_code([] { load_sim_profile("/nonexistent/profile"); }) == Errc::io_error);
}

TEST_CASE("device fixture text")
{
  auto d = parse_device_fixture("sim0 1 0 4096 8\n# spare\nsim1 3 5 1073741824 2\n");
  REQUIRE(d.size() == 2);
  CHECK(d[0] == DeviceInfo{"sim0", {1, 0}, 4096, 8});
  CHECK(d[1] == DeviceInfo{"sim1", {3, 5}, 1073741824, 2});
  CHECK(thrown_code([] { parse_device_fixture("sim0 1 0 4096\n"); }) == Errc::invalid_config);
  CHECK(thrown_code([] { parse_device_fixture("sim0 1 0 4096 8 9\n"); }) == Errc::invalid_config);
  CHECK(thrown_code([] { parse_device_fixture("sim0 one 0 4096 8\n"); }) == Errc::invalid_config);
}

TEST_CASE("backend names")
{
  CHECK(parse_backend("host") == BackendKind::host);
  CHECK(parse_backend("sim") == BackendKind::sim);
  CHECK(thrown_code([] { parse_backend("cuda"); }) == Errc::invalid_config);
}

TEST_CASE("stage durations")
{
  SimProfile s;
  CHECK(op_duration(s, {OpKind::write, 6000}) == 11.0);
  CHECK(op_duration(s, {OpKind::read, 0}) == 10.0);
  CHECK(op_duration(s, {OpKind::kernel, 2000}) == 6.0);
}

TEST_CASE("hand-computed sim schedule")
{
  // one engine per class: w1 [0,11], w2 [11,22], k1 [11,17], r1 [17,28], k2 [22,28]
  DeviceServer dev(info(), BackendKind::sim);
  StreamId s1 = dev.create_stream(), s2 = dev.create_stream();
  CHECK(s1.index == 1);
  CHECK(s2.index == 2);
  auto nop = [](OpContext&) {};
  std::vector<Token<Unit>> t{dev.submit(s1, {OpKind::write, 6000}, nop), dev.submit(s2, {OpKind::write, 6000}, nop),
                             dev.submit(s1, {OpKind::kernel, 2000}, nop), dev.submit(s1, {OpKind::read, 6000}, nop),
                             dev.submit(s2, {OpKind::kernel, 2000}, nop)};
  wait_all(t);
  CHECK(dev.synchronize().get() == 28.0);
  auto ev = dev.events();
  REQUIRE(ev.size() == 5);
  double want[5][2] = {{0, 11}, {11, 22}, {11, 17}, {17, 28}, {22, 28}};
  for(int i = 0; i < 5; ++i) {
    CHECK(ev[i].placement.start == want[i][0]);
    CHECK(ev[i].placement.end == want[i][1]);
  }
}

TEST_CASE("two copy engines let transfers run side by side")
{
  SimProfile s;
  s.copy_engines_per_direction = 2;
  DeviceServer dev(info(), BackendKind::sim, s);
  StreamId a = dev.create_stream(), b = dev.create_stream();
  auto nop = [](OpContext&) {};
  wait_all(std::vector<Token<Unit>>{dev.submit(a, {OpKind::write, 6000}, nop),
                                    dev.submit(b, {OpKind::write, 6000}, nop)});
  auto ev = dev.events();
  CHECK(ev[0].placement.start == 0.0);
  CHECK(ev[1].placement.start == 0.0);
  CHECK(ev[0].placement.engine != ev[1].placement.engine);
}

TEST_CASE("pipelined partitions match the replay and the closed form")
{
  for(std::uint32_t p : {1u, 2u, 3u, 4u}) {
    CAPTURE(p);
    auto r = overlap::run(p, 4096);
    CHECK(r.outputs_ok);
    CHECK(r.ops == 3 * p);
    CHECK(r.mismatches == 0);
    CHECK(r.makespan == r.oracle_makespan);
    CHECK(overlap::within_pipeline_bound(r, p));
    if(p > 1)
      CHECK(r.makespan < p * (r.copy_in + r.compute + r.copy_out));
  }
}

TEST_CASE("replay agrees under a different profile")
{
  SimProfile s;
  s.copy_latency = 3;
  s.bandwidth = 500;
  s.kernel_latency = 40;
  s.per_item_cost = 0.01;
  s.compute_engines = 2;
  auto r = overlap::run(4, 1000, s);
  CHECK(r.mismatches == 0);
  CHECK(r.makespan == r.oracle_makespan);
}

TEST_CASE("sim timelines are deterministic")
{
  auto a = overlap::run(3, 2048), b = overlap::run(3, 2048);
  CHECK(overlap::same_timeline(a, b));
  CHECK(a.makespan == b.makespan);
}

TEST_CASE("per-stream order holds over random schedules")
{
  std::mt19937_64 rng(31);
  auto r = streamprops::fifo(rng, 150);
  CHECK_MESSAGE(r.violations == 0, r.first);
}

TEST_CASE("synchronize waits for earlier work only")
{
  DeviceServer dev(info(), BackendKind::sim);
  CHECK(dev.synchronize().wait_for(std::chrono::seconds(5)));

  StreamId s = dev.create_stream();
  Promise<Unit> gate;
  auto opened = gate.get_token();
  auto held = dev.submit(s, {OpKind::kernel, 2000}, [opened](OpContext&) { opened.wait(); });
  auto w = dev.submit(default_stream, {OpKind::write, 6000}, [](OpContext&) {});
  auto sync = dev.synchronize();
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  CHECK_FALSE(sync.is_ready());
  gate.set_value();
  // both earlier ops are done by the time synchronize completes
  double clock = sync.get();
  CHECK(held.is_ready());
  CHECK(w.is_ready());
  CHECK(clock == 11.0);

  // later work starts no earlier than the fence
  auto after = dev.submit(s, {OpKind::write, 0}, [](OpContext&) {});
  after.wait();
  CHECK(dev.events().back().placement.start == 11.0);
}

TEST_CASE("unknown stream fails the token")
{
  DeviceServer dev(info(), BackendKind::host);
  auto t = dev.submit(StreamId{5}, {OpKind::write, 1}, [](OpContext&) {});
  CHECK(error_code(t) == Errc::bad_args);
}

TEST_CASE("each device runs its work on its own threads")
{
  DeviceServer a(info("a"), BackendKind::host, {}, 2), b(info("b"), BackendKind::host, {}, 2);
  auto owned = [](DeviceServer& d) {
    auto w = d.worker_threads();
    std::set<std::thread::id> ids(w.begin(), w.end());
    ids.insert(d.dispatcher_thread());
    return ids;
  };
  auto ia = owned(a), ib = owned(b);
  for(auto id : ia)
    CHECK(ib.count(id) == 0);

  std::vector<Token<Unit>> t;
  std::mutex m;
  std::set<std::thread::id> ran_a, ran_b;
  for(int i = 0; i < 50; ++i) {
    t.push_back(a.submit(default_stream, {OpKind::kernel, 1}, [&](OpContext&) {
      a.parallel_for(10000, [&](std::uint64_t, std::uint64_t) {
        std::lock_guard l(m);
        ran_a.insert(std::this_thread::get_id());
      });
    }));
    t.push_back(b.submit(default_stream, {OpKind::kernel, 1}, [&](OpContext&) {
      b.parallel_for(10000, [&](std::uint64_t, std::uint64_t) {
        std::lock_guard l(m);
        ran_b.insert(std::this_thread::get_id());
      });
    }));
  }
  wait_all(t);
  for(auto id : ran_a)
    CHECK(ia.count(id) == 1);
  for(auto id : ran_b)
    CHECK(ib.count(id) == 1);
  for(const auto& e : a.events())
    CHECK(e.worker == a.dispatcher_thread());
}

TEST_CASE("memory accounting")
{
  auto dev = std::make_shared<DeviceServer>(info("small", 1000), BackendKind::sim);
  auto b1 = std::make_shared<BufferServer>(dev, 600);
  CHECK(dev->memory_in_use() == 600);
  CHECK(thrown_code([&] { BufferServer b2(dev, 600); }) == Errc::out_of_memory);
  b1.reset();
  CHECK(dev->memory_in_use() == 0);
  BufferServer b3(dev, 1000);
  CHECK(dev->memory_in_use() == 1000);
}

TEST_CASE("discovery filters by capability")
{
  RuntimeOptions opts;
  opts.backend = BackendKind::sim;
  opts.devices = {DeviceInfo{"old", {1, 0}, 1 << 20, 1}, DeviceInfo{"new", {3, 5}, 1 << 20, 1}};
  opts.pool_threads = 1;
  opts.compute_workers = 1;
  Runtime rt(opts);
  auto names = [&](std::uint32_t major, std::uint32_t minor) {
    std::vector<std::string> out;
    for(auto& d : rt.get_all_devices(major, minor).get())
      out.push_back(d.info().name);
    return out;
  };
  CHECK(names(1, 0) == std::vector<std::string>{"old", "new"});
  CHECK(names(2, 0) == std::vector<std::string>{"new"});
  CHECK(names(3, 6).empty());
  CHECK(names(9, 9).empty());

  auto d = rt.get_all_devices(0, 0).get().at(1);
  CHECK(d.device_info().get() == opts.devices[1]);
  CHECK(d.create_stream().get().index == 1);
  CHECK(d.create_stream().get().index == 2);
}

TEST_CASE("default devices")
{
  RuntimeOptions opts;
  opts.backend = BackendKind::sim;
  opts.pool_threads = 1;
  Runtime rt(opts);
  auto all = rt.get_all_devices(1, 0).get();
  REQUIRE(all.size() == 1);
  CHECK(all[0].info().name == "sim0");
  CHECK(all[0].info().capability == Capability{1, 0});
}

TEST_CASE("unknown device gid")
{
  Runtime rt(RuntimeOptions{BackendKind::host, {}, {}, 1, 1});
  auto d = rt.get_all_devices(0, 0).get().at(0);
  GlobalId bogus = d.gid();
  bogus.sequence += 999;
  CHECK(error_code(rt.local()->device_info(bogus)) == Errc::unknown_gid);
  CHECK(error_code(rt.local()->synchronize(bogus)) == Errc::unknown_gid);
  CHECK(error_code(rt.local()->create_stream(bogus)) == Errc::unknown_gid);
}
