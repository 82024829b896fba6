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

#ifndef OFFLOAD_DAEMON_HPP
#define OFFLOAD_DAEMON_HPP

#include "offload/net.hpp"
#include "offload/parcel.hpp"
#include "offload/runtime.hpp"

#include <atomic>
#include <list>
#include <memory>
#include <mutex>
#include <thread>

namespace offload {

  struct DaemonOptions {
    std::string listen = "127.0.0.1:0";
    RuntimeOptions runtime;
  };

  // Serves the local devices of its own Runtime to parcel clients. Each
  //  connection gets a reader thread that decodes requests in arrival order
  //  and hands them to the local endpoint; replies are sent as the resulting
  //  tokens complete, so they may overtake each other.
  class Daemon {
  public:
    // binds immediately; throws Error(io_error)
    explicit Daemon(DaemonOptions options);
    ~Daemon();

    Daemon(const Daemon&) = delete;
    Daemon& operator=(const Daemon&) = delete;

    std::uint16_t port() const { return listener_.port(); }
    // "127.0.0.1:<port>" style address clients can connect to
    std::string address() const;

    Runtime& runtime() { return runtime_; }

    void start();
    // closes the listener and every connection, then joins
    void stop();

    // Turns one request into its reply payload. Malformed payloads and
    //  failed actions become failed tokens.
    static Token<Bytes> dispatch(LocalEndpoint& endpoint, const Parcel& request);

  private:
    struct Connection {
      net::Socket socket;
      std::mutex send_mutex;
      std::thread reader;
      std::atomic<bool> done{false};
    };

    void accept_loop();
    void serve(const std::shared_ptr<Connection>& conn);

    DaemonOptions options_;
    Runtime runtime_;
    net::Listener listener_;
    std::thread acceptor_;
    std::mutex mutex_;
    bool stopping_ = false;
    std::list<std::shared_ptr<Connection>> connections_;
  };

}; // namespace offload

#endif
