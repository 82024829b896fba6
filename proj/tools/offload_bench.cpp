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

#include "offload/bench.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace offload;

namespace {

  std::pair<std::uint32_t, std::uint32_t> parse_range(const std::string& text)
  {
    auto dots = text.find("..");
    try {
      if(dots == std::string::npos) {
        auto v = std::uint32_t(std::stoul(text));
        return {v, v};
      }
      auto a = std::uint32_t(std::stoul(text.substr(0, dots)));
      auto b = std::uint32_t(std::stoul(text.substr(dots + 2)));
      if(a > b)
        throw Error(Errc::invalid_config, "empty range '" + text + "'");
      return {a, b};
    } catch(const std::logic_error&) {
      throw Error(Errc::invalid_config, "expected a..b, got '" + text + "'");
    }
  }

  std::vector<DeviceInfo> numbered_devices(BackendKind backend, std::uint32_t count)
  {
    std::vector<DeviceInfo> out;
    for(std::uint32_t i = 0; i < count; ++i) {
      DeviceInfo info = default_device_info(backend);
      info.name = std::string(to_string(backend)) + std::to_string(i);
      out.push_back(info);
    }
    return out;
  }

};

int main(int argc, char** argv)
{
  CLI::App app{"Runs one benchmark and prints CSV rows."};
  std::string benchmark;
  std::string backend_name = "host";
  std::uint32_t devices = 1;
  std::uint32_t partitions = 4;
  std::string m_range = "1..1";
  std::uint64_t size = 0;
  std::vector<std::string> remotes;
  std::string csv_path;
  bool async_write = false;
  std::string fixture, sim_profile, out_dir;
  std::uint32_t iterations = 11;

  app.add_option("benchmark", benchmark, "stencil, partition, mandelbrot or sum")
      ->required()
      ->check(CLI::IsMember({"stencil", "partition", "mandelbrot", "sum"}));
  app.add_option("--backend", backend_name, "host or sim")->check(CLI::IsMember({"host", "sim"}));
  auto* devices_opt = app.add_option("--devices", devices, "number of devices; partition spreads across them")
                          ->check(CLI::PositiveNumber);
  auto* partitions_opt = app.add_option("--partitions", partitions, "partition count")->check(CLI::PositiveNumber);
  app.add_option("--m-range", m_range, "partition size exponents, a..b");
  app.add_option("--size", size, "vector length (stencil, sum) or image edge (mandelbrot)");
  app.add_option("--remote", remotes, "daemon host:port; runs on its devices instead of local ones");
  app.add_option("--csv", csv_path, "append rows to this file");
  app.add_flag("--async-write", async_write, "mandelbrot: write images while the next one computes");
  app.add_option("--fixture", fixture, "device fixture file for local devices");
  app.add_option("--sim-profile", sim_profile, "cost profile for the sim backend");
  app.add_option("--iterations", iterations, "timed iterations; the first is discarded")
      ->check(CLI::Range(2u, 100000u));
  app.add_option("--out-dir", out_dir, "where mandelbrot images go (default: current directory)");
  CLI11_PARSE(app, argc, argv);

  try {
    RuntimeOptions opts;
    opts.backend = parse_backend(backend_name);
    if(!sim_profile.empty())
      opts.profile = load_sim_profile(sim_profile);
    opts.devices = fixture.empty() ? numbered_devices(opts.backend, devices) : load_device_fixture(fixture);
    Runtime runtime(opts);

    for(const auto& r : remotes)
      runtime.connect(r);
    std::vector<Device> all = get(runtime.get_all_devices(0, 0));
    std::vector<Device> pool;
    for(const auto& d : all)
      if(remotes.empty() ? d.gid().locality == 0 : d.gid().locality != 0)
        pool.push_back(d);
    if(pool.size() < devices)
      throw Error(Errc::invalid_config, std::to_string(devices) + " devices requested, " +
                                            std::to_string(pool.size()) + " available");
    pool.resize(devices);

    bench::Context ctx;
    ctx.protocol.iterations = iterations;
    ctx.backend = backend_name;
    ctx.virtual_clock = opts.backend == BackendKind::sim;

    std::vector<bench::Report> reports;
    if(benchmark == "stencil") {
      bench::StencilConfig cfg;
      cfg.n = size ? size : (1u << 20);
      reports.push_back(bench::run_stencil(cfg, pool.front(), ctx));
    } else if(benchmark == "sum") {
      bench::SumConfig cfg;
      cfg.n = size ? size : 1000;
      reports.push_back(bench::run_sum(cfg, pool.front(), ctx));
    } else if(benchmark == "mandelbrot") {
      bench::MandelbrotConfig cfg;
      cfg.width = cfg.height = size ? std::uint32_t(size) : 256;
      cfg.async_write = async_write;
      cfg.output_dir = out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(out_dir);
      reports.push_back(bench::run_mandelbrot(cfg, pool.front(), ctx));
    } else {
      auto [lo, hi] = parse_range(m_range);
      bench::PartitionConfig cfg;
      cfg.multi_device = devices_opt->count() > 0;
      cfg.partitions = partitions_opt->count() > 0 || !cfg.multi_device ? partitions : devices;
      for(std::uint32_t m = lo; m <= hi; ++m) {
        cfg.m = m;
        reports.push_back(bench::run_partition(cfg, pool, ctx));
      }
    }

    std::cout << bench::csv_header() << '\n';
    for(const auto& r : reports)
      std::cout << bench::csv_row(r) << '\n';
    if(!csv_path.empty()) {
      bool fresh = !std::filesystem::exists(csv_path) || std::filesystem::file_size(csv_path) == 0;
      std::ofstream out(csv_path, std::ios::app);
      if(!out)
        throw Error(Errc::io_error, "cannot open " + csv_path);
      if(fresh)
        out << bench::csv_header() << '\n';
      for(const auto& r : reports)
        out << bench::csv_row(r) << '\n';
    }
  } catch(const std::exception& e) {
    std::cerr << "offload-bench: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
