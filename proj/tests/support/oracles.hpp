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

// Reference computations the tests compare against. They are written
//  separately from the library on purpose and share none of its code beyond
//  plain value types.

#ifndef OFFLOAD_TESTS_ORACLES_HPP
#define OFFLOAD_TESTS_ORACLES_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

  inline std::vector<double> stencil(const std::vector<double>& x)
  {
    std::vector<double> y(x);
    for(std::size_t i = 1; i + 1 < x.size(); ++i) {
      double left = 0.5 * x[i - 1];
      double right = 0.5 * x[i + 1];
      double acc = left + x[i];
      y[i] = acc + right;
    }
    return y;
  }

  inline std::uint32_t sum(const std::vector<std::uint32_t>& v)
  {
    std::uint64_t acc = 0;
    for(auto x : v)
      acc = (acc + x) & 0xffffffffu;
    return std::uint32_t(acc);
  }

  // z <- z^2 + c from 0; counts steps taken while |z|^2 <= r^2
  inline std::uint32_t escape_count(std::complex<double> c, std::uint32_t max_iter, double radius)
  {
    std::complex<double> z = 0.0;
    std::uint32_t n = 0;
    while(n < max_iter && !(std::norm(z) > radius * radius)) {
      z = z * z + c;
      ++n;
    }
    return n;
  }

  struct View {
    double re_min = -2.0, re_max = 1.0, im_min = -1.5, im_max = 1.5;
  };

  inline std::vector<std::uint32_t> mandelbrot(std::uint32_t w, std::uint32_t h, std::uint32_t max_iter,
                                               double radius, View v = {})
  {
    std::vector<std::uint32_t> img;
    img.reserve(std::size_t(w) * h);
    double sx = (v.re_max - v.re_min) / w;
    double sy = (v.im_max - v.im_min) / h;
    for(std::uint32_t row = 0; row < h; ++row)
      for(std::uint32_t col = 0; col < w; ++col) {
        std::complex<double> c(v.re_min + (col + 0.5) * sx, v.im_max - (row + 0.5) * sy);
        img.push_back(escape_count(c, max_iter, radius));
      }
    return img;
  }

  // sqrt(sin^2 + cos^2) is one up to rounding
  inline bool partition_ok(const std::vector<double>& x, double tol = 1e-12)
  {
    for(double v : x)
      if(!(std::abs(v - 1.0) <= tol))
        return false;
    return true;
  }

  struct Ppm {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t maxval = 0;
    std::vector<std::uint8_t> rgb;
  };

  inline std::optional<Ppm> parse_ppm(const std::vector<std::uint8_t>& bytes)
  {
    std::size_t pos = 0;
    auto token = [&]() -> std::optional<std::string> {
      while(pos < bytes.size() && std::isspace(bytes[pos]))
        ++pos;
      std::string t;
      while(pos < bytes.size() && !std::isspace(bytes[pos]))
        t.push_back(char(bytes[pos++]));
      if(t.empty())
        return std::nullopt;
      return t;
    };
    auto magic = token();
    if(!magic || *magic != "P6")
      return std::nullopt;
    Ppm p;
    try {
      auto w = token(), h = token(), m = token();
      if(!w || !h || !m)
        return std::nullopt;
      p.width = std::uint32_t(std::stoul(*w));
      p.height = std::uint32_t(std::stoul(*h));
      p.maxval = std::uint32_t(std::stoul(*m));
    } catch(...) {
      return std::nullopt;
    }
    if(pos >= bytes.size() || !std::isspace(bytes[pos]))
      return std::nullopt;
    ++pos;
    if(bytes.size() - pos != std::size_t(p.width) * p.height * 3)
      return std::nullopt;
    p.rgb.assign(bytes.begin() + std::ptrdiff_t(pos), bytes.end());
    return p;
  }

  // -- simulated timeline ----------------------------------------------------
  //
  // Event-driven replay of a set of engines. Jobs are given in enqueue order.
  //  Each engine class takes its jobs strictly in that order; a job can start
  //  when its stream's previous job has ended, an engine of its class is idle
  //  and the fence time has passed.

  struct Job {
    std::uint32_t stream = 0;
    int cls = 0; // 0 copy in, 1 copy out, 2 compute
    double duration = 0.0;
  };

  struct Slot {
    double start = 0.0;
    double end = 0.0;
  };

  inline std::vector<Slot> replay(const std::vector<Job>& jobs, const std::uint32_t engines[3], double fence = 0.0)
  {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<Slot> out(jobs.size(), Slot{inf, inf});
    std::vector<std::size_t> queue[3];
    for(std::size_t i = 0; i < jobs.size(); ++i)
      queue[jobs[i].cls].push_back(i);
    std::size_t head[3] = {0, 0, 0};
    std::vector<double> busy_until[3];
    for(int c = 0; c < 3; ++c)
      busy_until[c].assign(engines[c], 0.0);
    // previous job of the same stream
    std::vector<std::ptrdiff_t> pred(jobs.size(), -1);
    for(std::size_t i = 0; i < jobs.size(); ++i)
      for(std::size_t j = i; j-- > 0;)
        if(jobs[j].stream == jobs[i].stream) {
          pred[i] = std::ptrdiff_t(j);
          break;
        }

    double now = fence;
    std::size_t started = 0;
    while(started < jobs.size()) {
      bool progress = true;
      while(progress) {
        progress = false;
        for(int c = 0; c < 3; ++c) {
          if(head[c] == queue[c].size())
            continue;
          std::size_t i = queue[c][head[c]];
          if(pred[i] >= 0 && !(out[std::size_t(pred[i])].end <= now))
            continue;
          auto idle = std::find_if(busy_until[c].begin(), busy_until[c].end(), [&](double t) { return t <= now; });
          if(idle == busy_until[c].end())
            continue;
          out[i] = {now, now + jobs[i].duration};
          *idle = out[i].end;
          ++head[c];
          ++started;
          progress = true;
        }
      }
      if(started == jobs.size())
        break;
      double next = inf;
      for(auto& s : out)
        if(s.end > now && s.end < next)
          next = s.end;
      for(int c = 0; c < 3; ++c)
        for(double t : busy_until[c])
          if(t > now && t < next)
            next = t;
      if(next == inf)
        break; // cannot happen for a well-formed job list
      now = next;
    }
    return out;
  }

  inline double makespan(const std::vector<Slot>& slots, double fence = 0.0)
  {
    double m = fence;
    for(auto& s : slots)
      m = std::max(m, s.end);
    return m;
  }

}; // namespace oracle

#endif
