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

#include "offload/net.hpp"

#include "offload/error.hpp"

#include <cerrno>
#include <charconv>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

namespace offload::net {

  HostPort parse_address(std::string_view address)
  {
    auto colon = address.rfind(':');
    if(colon == std::string_view::npos || colon == 0)
      throw Error(Errc::invalid_config, "expected host:port, got '" + std::string(address) + "'");
    HostPort hp;
    hp.host = std::string(address.substr(0, colon));
    auto port = address.substr(colon + 1);
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if(ec != std::errc{} || ptr != port.data() + port.size() || value > 65535)
      throw Error(Errc::invalid_config, "bad port in '" + std::string(address) + "'");
    hp.port = std::uint16_t(value);
    return hp;
  }

  namespace {

    struct AddrInfo {
      addrinfo* list = nullptr;
      ~AddrInfo()
      {
        if(list)
          freeaddrinfo(list);
      }
    };

    int lookup(const HostPort& address, bool passive, AddrInfo& out)
    {
      addrinfo hints{};
      hints.ai_family = AF_UNSPEC;
      hints.ai_socktype = SOCK_STREAM;
      if(passive)
        hints.ai_flags = AI_PASSIVE;
      std::string port = std::to_string(address.port);
      return getaddrinfo(address.host.c_str(), port.c_str(), &hints, &out.list);
    }

  };

  Socket& Socket::operator=(Socket&& other) noexcept
  {
    if(this != &other) {
      close();
      fd_ = other.release();
    }
    return *this;
  }

  int Socket::release()
  {
    int fd = fd_;
    fd_ = -1;
    return fd;
  }

  void Socket::close()
  {
    if(fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

  void Socket::shutdown()
  {
    if(fd_ >= 0)
      ::shutdown(fd_, SHUT_RDWR);
  }

  bool Socket::send_all(const void* data, std::size_t size)
  {
    auto* p = static_cast<const char*>(data);
    while(size > 0) {
      ssize_t n = ::send(fd_, p, size, MSG_NOSIGNAL);
      if(n < 0 && errno == EINTR)
        continue;
      if(n <= 0)
        return false;
      p += n;
      size -= std::size_t(n);
    }
    return true;
  }

  bool Socket::recv_exact(void* data, std::size_t size)
  {
    auto* p = static_cast<char*>(data);
    while(size > 0) {
      ssize_t n = ::recv(fd_, p, size, 0);
      if(n < 0 && errno == EINTR)
        continue;
      if(n <= 0)
        return false;
      p += n;
      size -= std::size_t(n);
    }
    return true;
  }

  Socket connect_tcp(const HostPort& address)
  {
    AddrInfo ai;
    std::string where = address.host + ":" + std::to_string(address.port);
    if(int rc = lookup(address, false, ai); rc != 0)
      throw Error(Errc::connection_refused, where + ": " + gai_strerror(rc));
    int last_errno = 0;
    for(addrinfo* a = ai.list; a; a = a->ai_next) {
      Socket s(::socket(a->ai_family, a->ai_socktype, a->ai_protocol));
      if(!s.valid())
        continue;
      if(::connect(s.fd(), a->ai_addr, a->ai_addrlen) == 0) {
        int one = 1;
        setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        return s;
      }
      last_errno = errno;
    }
    throw Error(Errc::connection_refused, where + ": " + std::strerror(last_errno));
  }

  Listener::Listener(const HostPort& address)
  {
    AddrInfo ai;
    std::string where = address.host + ":" + std::to_string(address.port);
    if(int rc = lookup(address, true, ai); rc != 0)
      throw Error(Errc::io_error, "cannot resolve " + where + ": " + gai_strerror(rc));
    int last_errno = 0;
    for(addrinfo* a = ai.list; a; a = a->ai_next) {
      Socket s(::socket(a->ai_family, a->ai_socktype, a->ai_protocol));
      if(!s.valid())
        continue;
      int one = 1;
      setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
      if(::bind(s.fd(), a->ai_addr, a->ai_addrlen) != 0 || ::listen(s.fd(), 64) != 0) {
        last_errno = errno;
        continue;
      }
      sockaddr_storage bound{};
      socklen_t len = sizeof bound;
      getsockname(s.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
      if(bound.ss_family == AF_INET)
        port_ = ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
      else
        port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port);
      socket_ = std::move(s);
      return;
    }
    throw Error(Errc::io_error, "cannot listen on " + where + ": " + std::strerror(last_errno));
  }

  Socket Listener::accept()
  {
    for(;;) {
      int fd = ::accept(socket_.fd(), nullptr, nullptr);
      if(fd >= 0) {
        int one = 1;
        setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        return Socket(fd);
      }
      if(errno == EINTR || errno == ECONNABORTED)
        continue;
      return Socket();
    }
  }

}; // namespace offload::net
