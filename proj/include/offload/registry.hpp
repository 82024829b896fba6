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

#ifndef OFFLOAD_REGISTRY_HPP
#define OFFLOAD_REGISTRY_HPP

#include "offload/error.hpp"
#include "offload/global_id.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace offload {

  class Endpoint;

  // Base of every object the registry can hold.
  class Object {
  public:
    virtual ~Object() = default;
    virtual ObjectKind kind() const = 0;
  };

  struct LocalityInfo {
    std::uint32_t locality_id = 0;
    std::string address; // "local" for locality 0
    bool connected = true;
  };

  struct Resolution {
    LocalityInfo locality;
    // the object itself for locality 0, otherwise the transport proxy
    std::variant<std::shared_ptr<Object>, std::shared_ptr<Endpoint>> target;

    bool is_local() const { return target.index() == 0; }
    const std::shared_ptr<Object>& object() const { return std::get<0>(target); }
    const std::shared_ptr<Endpoint>& proxy() const { return std::get<1>(target); }
  };

  // Global object directory of one process. Locality 0 is always this process;
  //  remote localities are added by connect() and own every GID that carries
  //  their id.
  class Registry {
  public:
    Registry();
    explicit Registry(std::uint32_t nonce);

    Registry(const Registry&) = delete;
    Registry& operator=(const Registry&) = delete;

    std::uint32_t nonce() const { return nonce_; }

    GlobalId register_object(std::shared_ptr<Object> object);

    // throws Error(unknown_gid)
    Resolution resolve(const GlobalId& gid) const;

    template <typename T>
    std::shared_ptr<T> resolve_local(const GlobalId& gid) const
    {
      Resolution r = resolve(gid);
      if(!r.is_local())
        throw Error(Errc::unknown_gid, gid.to_string() + " is not a local object");
      auto typed = std::dynamic_pointer_cast<T>(r.object());
      if(!typed)
        throw Error(Errc::bad_args, gid.to_string() + " names an object of the wrong kind");
      return typed;
    }

    // Drops the registry's reference. The object itself lives on until every
    //  in-flight operation holding it has drained. Throws Error(unknown_gid).
    void unregister(const GlobalId& gid);

    std::size_t size() const;

    std::uint32_t add_locality(std::string address, std::shared_ptr<Endpoint> proxy);
    void mark_disconnected(std::uint32_t locality_id);
    std::vector<LocalityInfo> localities() const;
    std::shared_ptr<Endpoint> proxy(std::uint32_t locality_id) const;

  private:
    struct Remote {
      LocalityInfo info;
      std::shared_ptr<Endpoint> proxy;
    };

    const std::uint32_t nonce_;
    std::atomic<std::uint64_t> next_sequence_{1};
    mutable std::shared_mutex objects_mutex_;
    std::unordered_map<GlobalId, std::shared_ptr<Object>> objects_;
    mutable std::shared_mutex localities_mutex_;
    std::vector<Remote> remotes_; // remotes_[i] is locality i+1
  };

}; // namespace offload

#endif
