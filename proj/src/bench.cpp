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

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace offload::bench {

  const char* const stencil_source = R"(
kernel stencil(x: buffer_f64, y: buffer_f64, n: scalar_u32) {
  let i = gtid;
  if (i < n) {
    if (i == 0 || i == n - 1) {
      y[i] = x[i];
    } else {
      y[i] = 0.5 * x[i - 1] + x[i] + 0.5 * x[i + 1];
    }
  }
}
)";

  const char* const partition_source = R"(
// in place: x[j] = sqrt(sin(i)^2 + cos(i)^2) for global index i = offset + j
kernel partition(x: buffer_f64, offset: scalar_u32, count: scalar_u32) {
  if (gtid < count) {
    let i = f64(offset + gtid);
    let s = sin(i);
    let c = cos(i);
    x[gtid] = sqrt(s * s + c * c);
  }
}
)";

  const char* const mandelbrot_source = R"(
kernel mandelbrot(img: buffer_u32, width: scalar_u32, height: scalar_u32, max_iter: scalar_u32,
                  re_min: scalar_f64, im_max: scalar_f64, dx: scalar_f64, dy: scalar_f64,
                  r2: scalar_f64) {
  if (gtid < width * height) {
    let px = gtid % width;
    let py = gtid / width;
    let cr = re_min + (f64(px) + 0.5) * dx;
    let ci = im_max - (f64(py) + 0.5) * dy;
    let zr = 0.0;
    let zi = 0.0;
    let count = 0;
    for step in 0 .. max_iter {
      break if (zr * zr + zi * zi > r2);
      let t = zr * zr - zi * zi + cr;
      zi = 2.0 * zr * zi + ci;
      zr = t;
      count = count + 1;
    }
    img[gtid] = count;
  }
}
)";

  const char* const sum_source = R"(
// one work item accumulates; the others idle
kernel sum(input: buffer_u32, result: buffer_u32, len: buffer_u32) {
  if (gtid == 0) {
    let acc = 0;
    for i in 0 .. len[0] {
      acc = acc + input[i];
    }
    result[0] = acc;
  }
}
)";

  void TimingProtocol::validate() const
  {
    if(iterations <= discard)
      throw Error(Errc::invalid_config, "timing protocol keeps no iterations");
  }

  double measure(const TimingProtocol& protocol, const std::function<double()>& workload,
                 std::vector<double>& samples)
  {
    protocol.validate();
    samples.clear();
    double total = 0.0;
    for(std::uint32_t i = 0; i < protocol.iterations; ++i) {
      double ms = workload();
      samples.push_back(ms);
      if(i >= protocol.discard)
        total += ms;
    }
    return total / double(protocol.iterations - protocol.discard);
  }

  double measure(const TimingProtocol& protocol, const std::function<double()>& workload)
  {
    std::vector<double> samples;
    return measure(protocol, workload, samples);
  }

  std::string csv_header()
  {
    return "benchmark,backend,devices,partitions,n_or_pixels,mean_ms,validated";
  }

  std::string csv_row(const Report& r)
  {
    char mean[64];
    std::snprintf(mean, sizeof mean, "%.6f", r.mean_ms);
    std::ostringstream os;
    os << r.benchmark << ',' << r.backend << ',' << r.devices << ',' << r.partitions << ',' << r.n_or_pixels
       << ',' << mean << ',' << (r.validated ? "true" : "false");
    return os.str();
  }

  namespace {

    std::int64_t now_ns()
    {
      return std::chrono::duration_cast<std::chrono::nanoseconds>(
                 std::chrono::steady_clock::now().time_since_epoch())
          .count();
    }

    template <typename T>
    Bytes to_bytes(const std::vector<T>& v)
    {
      Bytes b(v.size() * sizeof(T));
      if(!b.empty())
        std::memcpy(b.data(), v.data(), b.size());
      return b;
    }

    template <typename T>
    std::vector<T> from_bytes(const Bytes& b)
    {
      std::vector<T> v(b.size() / sizeof(T));
      if(!v.empty())
        std::memcpy(v.data(), b.data(), v.size() * sizeof(T));
      return v;
    }

    std::uint32_t as_u32(std::uint64_t v, const char* what)
    {
      if(v > 0xffffffffull)
        throw Error(Errc::invalid_config, std::string(what) + " does not fit in 32 bits");
      return std::uint32_t(v);
    }

    Dim3 blocks_for(std::uint64_t items, std::uint32_t block)
    {
      return Dim3{as_u32((items + block - 1) / block, "block count"), 1, 1};
    }

    // Runs one iteration and returns its duration: the longest virtual span
    //  across the devices, or wall time.
    template <typename F>
    double timed(const Context& ctx, const std::vector<Device>& devices, F&& body)
    {
      if(!ctx.virtual_clock) {
        auto t0 = std::chrono::steady_clock::now();
        body();
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      }
      std::vector<Token<double>> before;
      for(const auto& d : devices)
        before.push_back(d.synchronize_clock());
      std::vector<double> start;
      for(auto& t : before)
        start.push_back(get(t));
      body();
      double span = 0.0;
      for(std::size_t i = 0; i < devices.size(); ++i)
        span = std::max(span, get(devices[i].synchronize_clock()) - start[i]);
      return span / 1000.0; // microseconds to ms
    }

    template <typename T>
    void check_equal(const std::vector<T>& got, const std::vector<T>& want, const char* what)
    {
      if(got.size() != want.size())
        throw Error(Errc::validation_failed, std::string(what) + ": got " + std::to_string(got.size()) +
                                                 " elements, expected " + std::to_string(want.size()));
      if(std::memcmp(got.data(), want.data(), got.size() * sizeof(T)) == 0)
        return;
      for(std::size_t i = 0; i < got.size(); ++i)
        if(std::memcmp(&got[i], &want[i], sizeof(T)) != 0) {
          std::ostringstream os;
          os.precision(17);
          os << what << ": first mismatch at index " << i << ", got " << got[i] << ", expected " << want[i];
          throw Error(Errc::validation_failed, os.str());
        }
    }

    Report base_report(const char* name, const Context& ctx)
    {
      Report r;
      r.benchmark = name;
      r.backend = ctx.backend;
      return r;
    }

  };

  // -- stencil ---------------------------------------------------------------

  std::vector<double> stencil_input(const StencilConfig& cfg)
  {
    if(cfg.input)
      return *cfg.input;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(cfg.n);
    for(auto& v : x)
      v = dist(rng);
    return x;
  }

  std::vector<double> stencil_reference(const std::vector<double>& x)
  {
    std::vector<double> y(x);
    for(std::size_t i = 1; i + 1 < x.size(); ++i)
      y[i] = 0.5 * x[i - 1] + x[i] + 0.5 * x[i + 1];
    return y;
  }

  Report run_stencil(const StencilConfig& cfg, const Device& device, const Context& ctx)
  {
    std::vector<double> x = stencil_input(cfg);
    std::uint64_t n = x.size();
    if(n == 0)
      throw Error(Errc::invalid_config, "stencil needs n >= 1");
    if(cfg.block == 0)
      throw Error(Errc::invalid_config, "block size must be positive");
    std::vector<double> want = stencil_reference(x);
    Bytes input = to_bytes(x);

    Program program = get(device.create_program_with_source(stencil_source));
    get(program.build("stencil"));
    Buffer bx = get(device.create_buffer(n * sizeof(double)));
    Buffer by = get(device.create_buffer(n * sizeof(double)));
    std::uint32_t n32 = as_u32(n, "n");
    Dim3 grid = blocks_for(n, cfg.block);
    Dim3 block{cfg.block, 1, 1};

    Report report = base_report("stencil", ctx);
    report.n_or_pixels = n;
    report.mean_ms = measure(ctx.protocol, [&] {
      return timed(ctx, {device}, [&] {
        auto w = bx.enqueue_write(0, input);
        auto k = program.run({bx, by, n32}, "stencil", grid, block);
        auto r = by.enqueue_read(0, n * sizeof(double));
        get(w);
        get(k);
        report.output = get(r);
        check_equal(from_bytes<double>(report.output), want, "stencil");
      });
    }, report.samples_ms);
    report.validated = true;
    get(bx.release());
    get(by.release());
    get(program.release());
    return report;
  }

  // -- partition -------------------------------------------------------------

  std::uint64_t partition_length(const PartitionConfig& cfg)
  {
    std::uint64_t n = (std::uint64_t(1) << cfg.m) * 1024 * cfg.block_size;
    return cfg.multi_device ? n : n * cfg.partitions;
  }

  std::pair<std::uint64_t, std::uint64_t> partition_range(std::uint64_t n, std::uint32_t parts, std::uint32_t i)
  {
    return {n * i / parts, n * (i + 1) / parts};
  }

  Report run_partition(const PartitionConfig& cfg, const std::vector<Device>& devices, const Context& ctx)
  {
    if(devices.empty())
      throw Error(Errc::invalid_config, "partition needs at least one device");
    if(cfg.partitions == 0 || cfg.block_size == 0 || cfg.m > 20)
      throw Error(Errc::invalid_config, "partition needs p >= 1, block size >= 1 and m <= 20");
    std::uint64_t n = partition_length(cfg);
    as_u32(n, "vector length");
    if(n < cfg.partitions)
      throw Error(Errc::invalid_config, "more partitions than elements");
    std::uint32_t p = cfg.partitions;

    std::vector<Device> used = cfg.multi_device ? devices : std::vector<Device>{devices.front()};
    std::vector<Program> programs;
    for(const auto& d : used) {
      programs.push_back(get(d.create_program_with_source(partition_source)));
      get(programs.back().build("partition"));
    }

    struct Part {
      std::uint32_t device;
      std::uint64_t begin, count;
      StreamId stream;
      Buffer buffer;
      Bytes input;
    };
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<Part> parts;
    for(std::uint32_t i = 0; i < p; ++i) {
      Part part;
      part.device = std::uint32_t(i % used.size());
      auto [b, e] = partition_range(n, p, i);
      part.begin = b;
      part.count = e - b;
      part.stream = get(used[part.device].create_stream());
      part.buffer = get(used[part.device].create_buffer(part.count * sizeof(double)));
      std::vector<double> x(part.count);
      for(auto& v : x)
        v = dist(rng);
      part.input = to_bytes(x);
      parts.push_back(std::move(part));
    }

    Report report = base_report("partition", ctx);
    report.devices = std::uint32_t(used.size());
    report.partitions = p;
    report.n_or_pixels = n;
    for(const auto& part : parts)
      report.placement.push_back(part.device);

    Dim3 block{cfg.block_size, 1, 1};
    report.mean_ms = measure(ctx.protocol, [&] {
      return timed(ctx, used, [&] {
        // three rounds, ordered only by each partition's own stream
        std::vector<Token<Unit>> done;
        std::vector<Token<Bytes>> reads;
        for(auto& part : parts)
          done.push_back(part.buffer.enqueue_write(0, part.input, part.stream));
        for(auto& part : parts)
          done.push_back(programs[part.device].run(
              {part.buffer, std::uint32_t(part.begin), std::uint32_t(part.count)}, "partition",
              blocks_for(part.count, cfg.block_size), block, part.stream));
        for(auto& part : parts)
          reads.push_back(part.buffer.enqueue_read(0, part.count * sizeof(double), part.stream));
        wait_all(done);
        wait_all(reads);
        for(auto& t : done)
          get(t);
        report.output.clear();
        for(auto& r : reads) {
          const Bytes& b = r.get_ref();
          report.output.insert(report.output.end(), b.begin(), b.end());
        }
        // the identity holds to rounding; libm may differ from the device in the last bit
        auto got = from_bytes<double>(report.output);
        if(got.size() != n)
          throw Error(Errc::validation_failed, "partition: got " + std::to_string(got.size()) + " elements");
        for(std::size_t i = 0; i < got.size(); ++i)
          if(!(std::fabs(got[i] - 1.0) <= 1e-12))
            throw Error(Errc::validation_failed, "partition: element " + std::to_string(i) + " is " +
                                                     std::to_string(got[i]) + ", expected 1");
      });
    }, report.samples_ms);
    report.validated = true;
    for(auto& part : parts)
      get(part.buffer.release());
    for(auto& prog : programs)
      get(prog.release());
    return report;
  }

  // -- mandelbrot ------------------------------------------------------------

  std::uint32_t mandelbrot_iterations(double cr, double ci, std::uint32_t max_iter, double escape_radius)
  {
    double r2 = escape_radius * escape_radius;
    double zr = 0.0, zi = 0.0;
    std::uint32_t count = 0;
    for(std::uint32_t step = 0; step < max_iter; ++step) {
      if(zr * zr + zi * zi > r2)
        break;
      double t = zr * zr - zi * zi + cr;
      zi = 2.0 * zr * zi + ci;
      zr = t;
      ++count;
    }
    return count;
  }

  std::vector<std::uint32_t> mandelbrot_reference(const MandelbrotConfig& cfg)
  {
    double dx = (cfg.re_max - cfg.re_min) / double(cfg.width);
    double dy = (cfg.im_max - cfg.im_min) / double(cfg.height);
    std::vector<std::uint32_t> out(std::size_t(cfg.width) * cfg.height);
    for(std::uint32_t py = 0; py < cfg.height; ++py)
      for(std::uint32_t px = 0; px < cfg.width; ++px) {
        double cr = cfg.re_min + (double(px) + 0.5) * dx;
        double ci = cfg.im_max - (double(py) + 0.5) * dy;
        out[std::size_t(py) * cfg.width + px] = mandelbrot_iterations(cr, ci, cfg.max_iter, cfg.escape_radius);
      }
    return out;
  }

  Bytes encode_ppm(const std::vector<std::uint32_t>& iterations, std::uint32_t width, std::uint32_t height,
                   std::uint32_t max_iter)
  {
    if(iterations.size() != std::size_t(width) * height)
      throw Error(Errc::invalid_config, "image has " + std::to_string(iterations.size()) + " pixels, expected " +
                                            std::to_string(std::size_t(width) * height));
    std::string header = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    Bytes out(header.begin(), header.end());
    out.reserve(out.size() + iterations.size() * 3);
    for(std::uint32_t it : iterations) {
      std::uint64_t level = max_iter == 0 ? 255 : std::min<std::uint64_t>(255, 255ull * it / max_iter);
      out.insert(out.end(), 3, std::uint8_t(level));
    }
    return out;
  }

  void write_image(const std::vector<std::uint32_t>& iterations, std::uint32_t width, std::uint32_t height,
                   std::uint32_t max_iter, const std::filesystem::path& path)
  {
    Bytes data = encode_ppm(iterations, width, height, max_iter);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if(!out)
      throw Error(Errc::io_error, "cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if(!out)
      throw Error(Errc::io_error, "write failed: " + path.string());
  }

  Report run_mandelbrot(const MandelbrotConfig& cfg, const Device& device, const Context& ctx)
  {
    std::uint64_t pixels = std::uint64_t(cfg.width) * cfg.height;
    if(pixels == 0)
      throw Error(Errc::invalid_config, "image must have at least one pixel");
    as_u32(pixels, "pixel count");
    std::vector<std::uint32_t> want = mandelbrot_reference(cfg);

    Program program = get(device.create_program_with_source(mandelbrot_source));
    get(program.build("mandelbrot"));
    Buffer image = get(device.create_buffer(pixels * sizeof(std::uint32_t)));
    double dx = (cfg.re_max - cfg.re_min) / double(cfg.width);
    double dy = (cfg.im_max - cfg.im_min) / double(cfg.height);
    double r2 = cfg.escape_radius * cfg.escape_radius;
    std::vector<KernelArg> args{image, cfg.width, cfg.height, cfg.max_iter, cfg.re_min, cfg.im_max, dx, dy, r2};
    Dim3 grid = blocks_for(pixels, 32);
    Dim3 block{32, 1, 1};

    auto writer = cfg.writer;
    if(!writer) {
      auto path = cfg.output_dir.empty()
                      ? std::filesystem::path()
                      : cfg.output_dir / ("mandelbrot_" + std::to_string(cfg.width) + "x" +
                                          std::to_string(cfg.height) + ".ppm");
      writer = [path, cfg](const std::vector<std::uint32_t>& iters, std::uint32_t) {
        if(path.empty())
          encode_ppm(iters, cfg.width, cfg.height, cfg.max_iter);
        else
          write_image(iters, cfg.width, cfg.height, cfg.max_iter, path);
      };
    }

    Report report = base_report("mandelbrot", ctx);
    report.n_or_pixels = pixels;
    std::mutex writes_mutex;
    std::vector<Token<Unit>> pending_writes;
    std::uint32_t index = 0;
    {
      // one writer thread, so images reach the disk in order
      TaskPool write_pool(1);
      auto write = [&](std::vector<std::uint32_t> iters, std::uint32_t i) {
        Interval span;
        span.start_ns = now_ns();
        writer(iters, i);
        span.end_ns = now_ns();
        std::lock_guard lock(writes_mutex);
        if(report.writes.size() <= i)
          report.writes.resize(i + 1);
        report.writes[i] = span;
      };

      report.mean_ms = measure(ctx.protocol, [&] {
        return timed(ctx, {device}, [&] {
          auto k = program.run(args, "mandelbrot", grid, block);
          auto r = image.enqueue_read(0, pixels * sizeof(std::uint32_t));
          get(k);
          report.output = get(r);
          auto iters = from_bytes<std::uint32_t>(report.output);
          check_equal(iters, want, "mandelbrot");
          std::uint32_t i = index++;
          if(cfg.async_write)
            pending_writes.push_back(async(write_pool, [&write, iters = std::move(iters), i]() mutable {
              write(std::move(iters), i);
            }));
          else
            write(std::move(iters), i);
        });
      }, report.samples_ms);
      wait_all(pending_writes);
    }
    for(auto& w : pending_writes)
      get(w);
    report.validated = true;
    get(image.release());
    get(program.release());
    return report;
  }

  // -- sum -------------------------------------------------------------------

  std::uint32_t sum_reference(const std::vector<std::uint32_t>& values)
  {
    std::uint32_t acc = 0;
    for(auto v : values)
      acc += v;
    return acc;
  }

  Report run_sum(const SumConfig& cfg, const Device& device, const Context& ctx)
  {
    std::vector<std::uint32_t> values = cfg.input ? *cfg.input : std::vector<std::uint32_t>(cfg.n, 1u);
    std::uint64_t n = values.size();
    if(n == 0)
      throw Error(Errc::invalid_config, "sum needs n >= 1");
    std::uint32_t want = sum_reference(values);
    Bytes input = to_bytes(values);
    Bytes len = to_bytes(std::vector<std::uint32_t>{as_u32(n, "n")});
    Bytes zero(sizeof(std::uint32_t), 0);

    Program program = get(device.create_program_with_source(sum_source));
    get(program.build("sum"));
    Buffer in_buf = get(device.create_buffer(n * sizeof(std::uint32_t)));
    Buffer result_buf = get(device.create_buffer(sizeof(std::uint32_t)));
    Buffer len_buf = get(device.create_buffer(sizeof(std::uint32_t)));

    Report report = base_report("sum", ctx);
    report.n_or_pixels = n;
    report.mean_ms = measure(ctx.protocol, [&] {
      return timed(ctx, {device}, [&] {
        // the writes gate the launch, as in the original workflow
        std::vector<Token<Unit>> writes{in_buf.enqueue_write(0, input), result_buf.enqueue_write(0, zero),
                                        len_buf.enqueue_write(0, len)};
        get(when_all(writes));
        get(program.run({in_buf, result_buf, len_buf}, "sum", Dim3{1, 1, 1}, Dim3{32, 1, 1}));
        report.output = result_buf.enqueue_read_sync(0, sizeof(std::uint32_t));
        check_equal(from_bytes<std::uint32_t>(report.output), std::vector<std::uint32_t>{want}, "sum");
      });
    }, report.samples_ms);
    report.validated = true;
    get(in_buf.release());
    get(result_buf.release());
    get(len_buf.release());
    get(program.release());
    return report;
  }

}; // namespace offload::bench
