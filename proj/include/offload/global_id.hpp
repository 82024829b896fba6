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

#ifndef OFFLOAD_GLOBAL_ID_HPP
#define OFFLOAD_GLOBAL_ID_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

namespace offload {

  enum class ObjectKind : std::uint8_t {
    none = 0,
    device = 1,
    buffer = 2,
    program = 3,
  };

  // Names a runtime object independent of the locality holding it. The owning
  //  locality travels in-band, so resolution never needs a directory lookup.
  struct GlobalId {
    std::uint32_t locality = 0;
    ObjectKind kind = ObjectKind::none;
    std::uint64_t sequence = 0;
    std::uint32_t nonce = 0;

    bool is_null() const { return kind == ObjectKind::none && sequence == 0; }

    GlobalId with_locality(std::uint32_t l) const
    {
      GlobalId g = *this;
      g.locality = l;
      return g;
    }

    friend bool operator==(const GlobalId&, const GlobalId&) = default;

    std::string to_string() const;
  };

  struct GlobalIdHash {
    std::size_t operator()(const GlobalId& g) const noexcept
    {
      std::uint64_t h = g.sequence * 0x9e3779b97f4a7c15ull;
      h ^= (std::uint64_t(g.locality) << 32) | g.nonce;
      h ^= std::uint64_t(g.kind) << 56;
      h ^= h >> 29;
      return std::size_t(h);
    }
  };

}; // namespace offload

template <>
struct std::hash<offload::GlobalId> : offload::GlobalIdHash {};

#endif
