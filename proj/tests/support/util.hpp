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

#ifndef OFFLOAD_TESTS_UTIL_HPP
#define OFFLOAD_TESTS_UTIL_HPP

#include "offload/error.hpp"
#include "offload/futures.hpp"

#include <cstring>
#include <optional>
#include <vector>

namespace testing {

  // Errc carried by a failed token, or nothing if it holds a value.
  template <typename T>
  std::optional<offload::Errc> error_code(const offload::Token<T>& token)
  {
    auto e = token.error();
    if(!e)
      return std::nullopt;
    try {
      std::rethrow_exception(e);
    } catch(const offload::Error& err) {
      return err.code();
    } catch(...) {
      return offload::Errc::internal;
    }
  }

  template <typename F>
  std::optional<offload::Errc> thrown_code(F&& f)
  {
    try {
      f();
    } catch(const offload::Error& err) {
      return err.code();
    }
    return std::nullopt;
  }

  template <typename T>
  std::vector<std::uint8_t> as_bytes(const std::vector<T>& v)
  {
    std::vector<std::uint8_t> out(v.size() * sizeof(T));
    if(!v.empty())
      std::memcpy(out.data(), v.data(), out.size());
    return out;
  }

  template <typename T>
  std::vector<T> from_bytes(const std::vector<std::uint8_t>& b)
  {
    std::vector<T> out(b.size() / sizeof(T));
    if(!out.empty())
      std::memcpy(out.data(), b.data(), out.size() * sizeof(T));
    return out;
  }

}; // namespace testing

#endif
