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

// One PASS/FAIL line per acceptance criterion. Exit status is the number of
//  failures.

#include "support/futures_laws.hpp"
#include "support/oracles.hpp"
#include "support/overlap.hpp"
#include "support/stream_props.hpp"
#include "support/util.hpp"
#include "support/wire_props.hpp"

#include "offload/bench.hpp"
#include "offload/daemon.hpp"
#include "offload/runtime.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>

using namespace offload;
using testing::from_bytes;

namespace {

  int failures = 0;

  void report(const char* name, const std::function<std::string(bool&)>& check)
  {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    try {
      detail = check(ok);
    } catch(const std::exception& e) {
      ok = false;
      detail = std::string("threw: ") + e.what();
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %-22s %s (%.1f s)\n", ok ? "PASS" : "FAIL", name, detail.c_str(), s);
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }

  RuntimeOptions options(BackendKind backend, std::size_t devices = 0)
  {
    RuntimeOptions o;
    o.backend = backend;
    for(std::size_t i = 0; i < devices; ++i)
      o.devices.push_back(DeviceInfo{"dev" + std::to_string(i), {1, 0}, 1ull << 32, 2});
    return o;
  }

  bench::Context quick(BackendKind backend)
  {
    bench::Context c;
    c.protocol = {2, 1};
    c.backend = std::string(to_string(backend));
    c.virtual_clock = backend == BackendKind::sim;
    return c;
  }

  std::string oracle_equality(bool& ok)
  {
    auto t0 = std::chrono::steady_clock::now();
    Runtime rt(options(BackendKind::host));
    Device d = rt.get_all_devices(0, 0).get().at(0);
    auto ctx = quick(BackendKind::host);
    std::mt19937_64 rng(1001);
    int checked = 0;
    for(std::uint64_t n : {1ull << 3, 1ull << 10, 1ull << 20}) {
      bench::StencilConfig sc;
      sc.n = n;
      sc.seed = n;
      auto s = bench::run_stencil(sc, d, ctx);
      ok = ok && s.output == testing::as_bytes(oracle::stencil(bench::stencil_input(sc)));

      bench::SumConfig sum;
      sum.n = n;
      sum.input = std::vector<std::uint32_t>(n);
      for(auto& v : *sum.input)
        v = std::uint32_t(rng());
      auto r = bench::run_sum(sum, d, ctx);
      ok = ok && from_bytes<std::uint32_t>(r.output) == std::vector<std::uint32_t>{oracle::sum(*sum.input)};
      checked += 2;
    }
    for(std::uint32_t side : {1u, 16u, 64u, 256u}) {
      bench::MandelbrotConfig mc;
      mc.width = mc.height = side;
      auto m = bench::run_mandelbrot(mc, d, ctx);
      ok = ok && m.output == testing::as_bytes(oracle::mandelbrot(side, side, mc.max_iter, mc.escape_radius));
      ++checked;
    }
    bench::PartitionConfig pc; // m = 1, 4 x 524288 = 2,097,152 elements
    auto p = bench::run_partition(pc, {d}, ctx);
    auto px = from_bytes<double>(p.output);
    ok = ok && px.size() == 2'097'152 && oracle::partition_ok(px, 1e-12);
    ++checked;
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ok = ok && secs < 60.0;
    std::ostringstream os;
    os << checked << " outputs vs oracles, partition n=" << px.size() << ", " << secs << " s of 60";
    return os.str();
  }

  std::string futures_laws(bool& ok)
  {
    std::mt19937_64 rng(1002);
    TaskPool pool(2);
    laws::Outcome all;
    all += laws::racing_fulfil(rng, 5000);
    all += laws::continuations_agree(rng, 25000);
    all += laws::then_chains(rng, 30000);
    all += laws::when_all_conjunction(rng, 25000);
    all += laws::quiescence(rng, 20000, &pool);
    ok = all.cases >= 100000 && all.violations == 0;
    return std::to_string(all.cases) + " cases, " + std::to_string(all.violations) + " violations" +
           (all.violations ? " (" + all.first + ")" : "");
  }

  std::string location_transparency(bool& ok)
  {
    DaemonOptions dopt;
    dopt.runtime = options(BackendKind::host);
    Daemon daemon(dopt);
    daemon.start();
    Runtime rt(options(BackendKind::host));
    rt.connect(daemon.address());
    auto devs = rt.get_all_devices(0, 0).get();
    Device local = devs.at(0), remote = devs.at(1);
    auto ctx = quick(BackendKind::host);
    int same = 0;
    auto both = [&](auto&& run) {
      Bytes a = run(local), b = run(remote);
      same += a == b && !a.empty();
      ok = ok && a == b && !a.empty();
    };
    bench::StencilConfig sc;
    sc.n = 1 << 16;
    both([&](const Device& d) { return bench::run_stencil(sc, d, ctx).output; });
    bench::PartitionConfig pc;
    pc.m = 0;
    pc.block_size = 64;
    pc.partitions = 4;
    both([&](const Device& d) { return bench::run_partition(pc, {d}, ctx).output; });
    bench::MandelbrotConfig mc;
    mc.width = mc.height = 64;
    both([&](const Device& d) { return bench::run_mandelbrot(mc, d, ctx).output; });
    both([&](const Device& d) { return bench::run_sum({}, d, ctx).output; });
    return std::to_string(same) + "/4 benchmarks byte-identical local vs loopback";
  }

  std::string wire_roundtrip(bool& ok)
  {
    std::mt19937_64 rng(1004);
    auto rt = wireprops::roundtrip(rng, 100000);
    auto fz = wireprops::fuzz(rng, 100000);
    ok = rt.violations == 0 && fz.violations == 0;
    return std::to_string(rt.cases) + " roundtrips, " + std::to_string(fz.cases) + " fuzz inputs, " +
           std::to_string(rt.violations + fz.violations) + " violations" +
           (rt.violations ? " (" + rt.first + ")" : fz.violations ? " (" + fz.first + ")" : "");
  }

  std::string stream_ordering(bool& ok)
  {
    std::mt19937_64 rng(1005);
    auto r = streamprops::fifo(rng, 1000, BackendKind::sim);
    ok = r.cases == 1000 && r.violations == 0;
    return std::to_string(r.cases) + " sim schedules, " + std::to_string(r.violations) + " reordered";
  }

  std::string overlap_claim(bool& ok)
  {
    std::ostringstream os;
    for(std::uint32_t p : {2u, 3u, 4u}) {
      auto a = overlap::run(p, 1 << 16);
      auto b = overlap::run(p, 1 << 16);
      auto serial = overlap::run(p, 1 << 16, {}, true);
      bool here = a.outputs_ok && a.mismatches == 0 && a.makespan == a.oracle_makespan &&
                  serial.mismatches == 0 && a.makespan < serial.makespan && overlap::same_timeline(a, b) &&
                  overlap::within_pipeline_bound(a, p);
      ok = ok && here;
      os << "p=" << p << " " << a.makespan << " vs " << serial.makespan << " us" << (here ? "" : " [bad]")
         << (p < 4 ? ", " : "");
    }
    return os.str();
  }

  std::string timing_protocol(bool& ok)
  {
    int calls = 0;
    std::vector<double> samples;
    double mean = bench::measure({}, [&] {
      ++calls;
      return double(calls * calls);
    }, samples);
    double want = 0;
    for(int i = 2; i <= 11; ++i)
      want += double(i * i);
    want /= 10;
    ok = calls == 11 && samples.size() == 11 && mean == want;

    // and through a real benchmark, counted in the device log
    Runtime rt(options(BackendKind::sim));
    Device d = rt.get_all_devices(0, 0).get().at(0);
    bench::Context ctx;
    ctx.virtual_clock = true;
    auto r = bench::run_sum({}, d, ctx);
    auto ev = rt.device_server(d)->events();
    auto kernels = std::count_if(ev.begin(), ev.end(), [](auto& e) { return e.kind == OpKind::kernel; });
    double tail = 0;
    for(std::size_t i = 1; i < r.samples_ms.size(); ++i)
      tail += r.samples_ms[i];
    ok = ok && kernels == 11 && r.samples_ms.size() == 11 && std::abs(r.mean_ms - tail / 10) <= 1e-12;
    return std::to_string(calls) + " counted calls, mean of last 10; " + std::to_string(kernels) +
           " kernel launches in the sum run";
  }

  std::string multi_device(bool& ok)
  {
    std::ostringstream os;
    for(std::size_t k = 1; k <= 4; ++k) {
      Runtime rt(options(BackendKind::sim, k));
      auto devs = rt.get_all_devices(0, 0).get();
      bench::PartitionConfig pc;
      pc.m = 0;
      pc.block_size = 32;
      pc.partitions = 8;
      pc.multi_device = true;
      auto ctx = quick(BackendKind::sim);
      auto r = bench::run_partition(pc, devs, ctx);
      bool here = devs.size() == k && oracle::partition_ok(from_bytes<double>(r.output));
      for(std::uint32_t i = 0; i < pc.partitions; ++i)
        here = here && r.placement.at(i) == i % k;
      // each device launched exactly its own partitions, on one stream apiece
      for(std::size_t j = 0; j < k; ++j) {
        std::uint32_t mine = 0;
        for(std::uint32_t i = 0; i < pc.partitions; ++i)
          mine += i % k == j;
        auto ev = rt.device_server(devs[j])->events();
        std::set<std::uint32_t> streams;
        std::size_t launches = 0;
        for(auto& e : ev)
          if(e.kind == OpKind::kernel) {
            ++launches;
            streams.insert(e.stream.index);
          }
        here = here && launches == std::size_t(mine) * ctx.protocol.iterations && streams.size() == mine;
      }
      ok = ok && here;
      os << "k=" << k << (here ? " ok" : " bad") << (k < 4 ? ", " : "");
    }
    return os.str();
  }

}; // namespace

int main()
{
  report("oracle-equality", oracle_equality);
  report("futures-laws", futures_laws);
  report("location-transparency", location_transparency);
  report("wire-roundtrip", wire_roundtrip);
  report("stream-ordering", stream_ordering);
  report("overlap", overlap_claim);
  report("timing-protocol", timing_protocol);
  report("multi-device-partition", multi_device);
  return failures;
}
