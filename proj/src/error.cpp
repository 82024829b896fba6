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

#include "offload/error.hpp"

namespace offload {

  std::string_view errc_name(Errc code)
  {
    switch(code) {
    case Errc::unknown_gid: return "unknown-GID";
    case Errc::bad_args: return "bad-args";
    case Errc::compile_error: return "compile-error";
    case Errc::oob_access: return "oob-access";
    case Errc::internal: return "internal";
    case Errc::not_built: return "not-built";
    case Errc::launch_config: return "launch-config";
    case Errc::out_of_memory: return "out-of-memory";
    case Errc::broken_promise: return "broken-promise";
    case Errc::promise_already_satisfied: return "promise-already-satisfied";
    case Errc::transport_lost: return "transport-lost";
    case Errc::connection_refused: return "connection-refused";
    case Errc::validation_failed: return "validation-failed";
    case Errc::io_error: return "io-error";
    case Errc::invalid_config: return "invalid-config";
    case Errc::payload_too_large: return "payload-too-large";
    }
    return "unknown-error";
  }

}; // namespace offload
