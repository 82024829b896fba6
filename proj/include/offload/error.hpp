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

#ifndef OFFLOAD_ERROR_HPP
#define OFFLOAD_ERROR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace offload {

  // Error taxonomy shared by every module. Values 1..8 double as REPLY_ERR
  //  wire codes and must not be renumbered.
  enum class Errc : std::uint32_t {
    unknown_gid = 1,
    bad_args = 2,
    compile_error = 3,
    oob_access = 4,
    internal = 5,
    not_built = 6,
    launch_config = 7,
    out_of_memory = 8,

    // local-only conditions, never sent on the wire
    broken_promise = 100,
    promise_already_satisfied,
    transport_lost,
    connection_refused,
    validation_failed,
    io_error,
    invalid_config,
    payload_too_large,
  };

  std::string_view errc_name(Errc code);

  class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message)
      , code_(code)
      , detail_(message)
    {}

    Errc code() const noexcept { return code_; }

    // message without the "<code>: " prefix
    const std::string& detail() const noexcept { return detail_; }

  private:
    Errc code_;
    std::string detail_;
  };

}; // namespace offload

#endif
