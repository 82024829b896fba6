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

// The four benchmarks, their sequential reference implementations and the
//  timing protocol. Every run validates its device output against the
//  reference before it reports a time.

#ifndef OFFLOAD_BENCH_HPP
#define OFFLOAD_BENCH_HPP

#include "offload/runtime.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace offload::bench {

  struct TimingProtocol {
    std::uint32_t iterations = 11;
    std::uint32_t discard = 1; // leading warm-up runs

    void validate() const; // throws Error(invalid_config) unless iterations > discard
  };

  // Runs the workload protocol.iterations times. Each call returns its own
  //  duration in ms; the result is the mean over the retained runs.
  double measure(const TimingProtocol& protocol, const std::function<double()>& workload);

  // as measure(), also handing back every sample
  double measure(const TimingProtocol& protocol, const std::function<double()>& workload,
                 std::vector<double>& samples);

  struct Context {
    TimingProtocol protocol;
    // time iterations on the devices' virtual clocks instead of the wall clock
    bool virtual_clock = false;
    std::string backend = "host";
  };

  // Wall-clock span of some host activity, steady_clock nanoseconds.
  struct Interval {
    std::int64_t start_ns = 0;
    std::int64_t end_ns = 0;
  };

  struct Report {
    std::string benchmark;
    std::string backend;
    std::uint32_t devices = 1;
    std::uint32_t partitions = 1;
    std::uint64_t n_or_pixels = 0;
    double mean_ms = 0.0;
    bool validated = false;
    std::vector<double> samples_ms;
    // result bytes of the last iteration, for cross-run comparison
    Bytes output;
    // partition i ran on devices[placement[i]]
    std::vector<std::uint32_t> placement;
    // mandelbrot image writes, one per iteration
    std::vector<Interval> writes;
  };

  std::string csv_header(); // without newline
  std::string csv_row(const Report& report);

  // -- stencil ---------------------------------------------------------------

  extern const char* const stencil_source;

  struct StencilConfig {
    std::uint64_t n = 1024;
    std::uint32_t block = 32;
    std::uint64_t seed = 1;
    // used instead of seeded random values when set
    std::optional<std::vector<double>> input;
  };

  std::vector<double> stencil_input(const StencilConfig& cfg);
  // endpoints pass through, interior is 0.5*x[i-1] + x[i] + 0.5*x[i+1]
  std::vector<double> stencil_reference(const std::vector<double>& x);
  Report run_stencil(const StencilConfig& cfg, const Device& device, const Context& ctx);

  // -- partition -------------------------------------------------------------

  extern const char* const partition_source;

  struct PartitionConfig {
    std::uint32_t m = 1;
    std::uint32_t block_size = 256;
    std::uint32_t partitions = 4;
    // n = 2^m*1024*block_size, sliced across the devices, instead of
    //  2^m*1024*block_size*partitions on the first device
    bool multi_device = false;
    std::uint64_t seed = 1;
  };

  std::uint64_t partition_length(const PartitionConfig& cfg);
  // [begin, end) of partition i
  std::pair<std::uint64_t, std::uint64_t> partition_range(std::uint64_t n, std::uint32_t parts, std::uint32_t i);
  Report run_partition(const PartitionConfig& cfg, const std::vector<Device>& devices, const Context& ctx);

  // -- mandelbrot ------------------------------------------------------------

  extern const char* const mandelbrot_source;

  struct MandelbrotConfig {
    std::uint32_t width = 256;
    std::uint32_t height = 256;
    std::uint32_t max_iter = 256;
    double escape_radius = 2.0;
    double re_min = -2.0;
    double re_max = 1.0;
    double im_min = -1.5;
    double im_max = 1.5;
    bool async_write = false;
    // every iteration rewrites <output_dir>/mandelbrot_<w>x<h>.ppm; empty
    //  keeps images in memory only
    std::filesystem::path output_dir;
    // replaces the file writer, for instrumentation
    std::function<void(const std::vector<std::uint32_t>& iterations, std::uint32_t index)> writer;
  };

  // escape count of one point: |z|^2 > r^2 is checked before each step
  std::uint32_t mandelbrot_iterations(double cr, double ci, std::uint32_t max_iter, double escape_radius);
  // row-major, row 0 at im_max, sampling pixel centers
  std::vector<std::uint32_t> mandelbrot_reference(const MandelbrotConfig& cfg);
  Report run_mandelbrot(const MandelbrotConfig& cfg, const Device& device, const Context& ctx);

  // Binary PPM, gray level floor(255*iter/max_iter). Throws Error(io_error).
  Bytes encode_ppm(const std::vector<std::uint32_t>& iterations, std::uint32_t width, std::uint32_t height,
                   std::uint32_t max_iter);
  void write_image(const std::vector<std::uint32_t>& iterations, std::uint32_t width, std::uint32_t height,
                   std::uint32_t max_iter, const std::filesystem::path& path);

  // -- sum -------------------------------------------------------------------

  extern const char* const sum_source;

  struct SumConfig {
    std::uint64_t n = 1000;
    // every element is 1 unless given
    std::optional<std::vector<std::uint32_t>> input;
  };

  std::uint32_t sum_reference(const std::vector<std::uint32_t>& values); // wraps modulo 2^32
  Report run_sum(const SumConfig& cfg, const Device& device, const Context& ctx);

}; // namespace offload::bench

#endif
