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

// Thin blocking TCP wrappers over POSIX sockets.

#ifndef OFFLOAD_NET_HPP
#define OFFLOAD_NET_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace offload::net {

  struct HostPort {
    std::string host;
    std::uint16_t port = 0;
  };

  // "host:port"; throws Error(invalid_config)
  HostPort parse_address(std::string_view address);

  class Socket {
  public:
    Socket() = default;
    explicit Socket(int fd)
      : fd_(fd)
    {}
    ~Socket() { close(); }

    Socket(Socket&& other) noexcept
      : fd_(other.release())
    {}
    Socket& operator=(Socket&& other) noexcept;

    bool valid() const { return fd_ >= 0; }
    int fd() const { return fd_; }
    int release();
    void close();
    // wakes any thread blocked in recv/accept on this socket
    void shutdown();

    // false if the peer is gone
    bool send_all(const void* data, std::size_t size);
    // false on EOF or error before size bytes arrived
    bool recv_exact(void* data, std::size_t size);

  private:
    int fd_ = -1;
  };

  // throws Error(connection_refused)
  Socket connect_tcp(const HostPort& address);

  class Listener {
  public:
    // binds and listens; port 0 picks a free port. Throws Error(io_error).
    explicit Listener(const HostPort& address);

    std::uint16_t port() const { return port_; }
    // invalid socket once shut down
    Socket accept();
    void shutdown() { socket_.shutdown(); }

  private:
    Socket socket_;
    std::uint16_t port_ = 0;
  };

}; // namespace offload::net

#endif
