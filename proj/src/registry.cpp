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

#include "offload/registry.hpp"

#include <mutex>
#include <random>
#include <sstream>

namespace offload {

  std::string GlobalId::to_string() const
  {
    std::ostringstream os;
    os << "gid{" << locality << ':' << unsigned(kind) << ':' << sequence << ':' << std::hex << nonce
       << '}';
    return os.str();
  }

  namespace {

    std::uint32_t random_nonce()
    {
      std::random_device rd;
      std::uint32_t n = rd();
      return n == 0 ? 1 : n;
    }

  };

  Registry::Registry()
    : nonce_(random_nonce())
  {}

  Registry::Registry(std::uint32_t nonce)
    : nonce_(nonce)
  {}

  GlobalId Registry::register_object(std::shared_ptr<Object> object)
  {
    GlobalId gid;
    gid.locality = 0;
    gid.kind = object->kind();
    gid.sequence = next_sequence_.fetch_add(1, std::memory_order_relaxed);
    gid.nonce = nonce_;
    std::unique_lock lock(objects_mutex_);
    objects_.emplace(gid, std::move(object));
    return gid;
  }

  Resolution Registry::resolve(const GlobalId& gid) const
  {
    if(gid.locality == 0) {
      std::shared_lock lock(objects_mutex_);
      auto it = objects_.find(gid);
      if(it == objects_.end())
        throw Error(Errc::unknown_gid, gid.to_string());
      return Resolution{LocalityInfo{0, "local", true}, it->second};
    }
    std::shared_lock lock(localities_mutex_);
    if(gid.locality > remotes_.size())
      throw Error(Errc::unknown_gid, gid.to_string() + " refers to an unknown locality");
    const Remote& r = remotes_[gid.locality - 1];
    return Resolution{r.info, r.proxy};
  }

  void Registry::unregister(const GlobalId& gid)
  {
    std::shared_ptr<Object> released;
    {
      std::unique_lock lock(objects_mutex_);
      auto it = objects_.find(gid);
      if(it == objects_.end())
        throw Error(Errc::unknown_gid, gid.to_string());
      released = std::move(it->second);
      objects_.erase(it);
    }
    // released drops outside the lock; destructors may be arbitrary
  }

  std::size_t Registry::size() const
  {
    std::shared_lock lock(objects_mutex_);
    return objects_.size();
  }

  std::uint32_t Registry::add_locality(std::string address, std::shared_ptr<Endpoint> proxy)
  {
    std::unique_lock lock(localities_mutex_);
    std::uint32_t id = std::uint32_t(remotes_.size() + 1);
    remotes_.push_back(Remote{LocalityInfo{id, std::move(address), true}, std::move(proxy)});
    return id;
  }

  void Registry::mark_disconnected(std::uint32_t locality_id)
  {
    std::unique_lock lock(localities_mutex_);
    if(locality_id >= 1 && locality_id <= remotes_.size())
      remotes_[locality_id - 1].info.connected = false;
  }

  std::vector<LocalityInfo> Registry::localities() const
  {
    std::shared_lock lock(localities_mutex_);
    std::vector<LocalityInfo> out{LocalityInfo{0, "local", true}};
    for(const auto& r : remotes_)
      out.push_back(r.info);
    return out;
  }

  std::shared_ptr<Endpoint> Registry::proxy(std::uint32_t locality_id) const
  {
    std::shared_lock lock(localities_mutex_);
    if(locality_id == 0 || locality_id > remotes_.size())
      throw Error(Errc::unknown_gid, "no remote locality " + std::to_string(locality_id));
    return remotes_[locality_id - 1].proxy;
  }

}; // namespace offload
