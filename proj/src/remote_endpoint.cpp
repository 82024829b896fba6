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

#include "offload/remote_endpoint.hpp"

namespace offload {

  std::shared_ptr<RemoteEndpoint> RemoteEndpoint::connect(const std::string& address)
  {
    net::Socket socket = net::connect_tcp(net::parse_address(address));
    std::shared_ptr<RemoteEndpoint> ep(new RemoteEndpoint(address, std::move(socket)));
    // the reader owns a reference, so the endpoint lives until the connection ends
    ep->reader_ = std::thread([ep] { ep->reader_loop(); });
    return ep;
  }

  RemoteEndpoint::RemoteEndpoint(std::string address, net::Socket socket)
    : address_(std::move(address))
    , socket_(std::move(socket))
  {}

  RemoteEndpoint::~RemoteEndpoint()
  {
    close();
    if(reader_.joinable()) {
      if(reader_.get_id() == std::this_thread::get_id())
        reader_.detach(); // the reader itself held the last reference and is returning
      else
        reader_.join();
    }
  }

  void RemoteEndpoint::on_disconnect(std::function<void()> callback)
  {
    std::lock_guard lock(pending_mutex_);
    on_disconnect_ = std::move(callback);
  }

  void RemoteEndpoint::close()
  {
    socket_.shutdown();
  }

  void RemoteEndpoint::fail_all(const std::string& why)
  {
    std::unordered_map<std::uint64_t, Promise<Bytes>> orphans;
    std::function<void()> callback;
    {
      std::lock_guard lock(pending_mutex_);
      closed_ = true;
      orphans.swap(pending_);
      callback = std::move(on_disconnect_);
    }
    for(auto& [id, promise] : orphans)
      promise.try_set_error(std::make_exception_ptr(Error(Errc::transport_lost, address_ + ": " + why)));
    if(callback)
      callback();
  }

  Token<Bytes> RemoteEndpoint::call(Opcode opcode, const GlobalId& target, Bytes payload)
  {
    Parcel p;
    p.opcode = opcode;
    p.target = target;
    p.payload = std::move(payload);
    std::uint8_t header[parcel_header_size];
    Token<Bytes> token;
    try {
      std::lock_guard lock(pending_mutex_);
      if(closed_)
        return make_failed<Bytes>(Error(Errc::transport_lost, address_ + ": connection closed"));
      p.request_id = next_request_++;
      encode_header(p, header);
      Promise<Bytes> promise;
      token = promise.get_token();
      pending_.emplace(p.request_id, std::move(promise));
    } catch(...) {
      return make_failed<Bytes>(std::current_exception());
    }

    // header and payload go out back to back; no frame copy for large writes
    std::lock_guard lock(send_mutex_);
    if(!socket_.send_all(header, sizeof header) ||
       (!p.payload.empty() && !socket_.send_all(p.payload.data(), p.payload.size())))
      socket_.shutdown(); // the reader sees EOF and fails everything pending
    return token;
  }

  void RemoteEndpoint::reader_loop()
  {
    std::uint8_t header[parcel_header_size];
    std::string why = "connection closed by peer";
    while(socket_.recv_exact(header, sizeof header)) {
      Decoded d = decode_header(header);
      if(d.status != DecodeStatus::ok) {
        why = "bad reply frame (" + std::string(to_string(d.status)) + ")";
        break;
      }
      Bytes payload(d.payload_len);
      if(d.payload_len > 0 && !socket_.recv_exact(payload.data(), payload.size())) {
        why = "connection closed mid-reply";
        break;
      }
      Promise<Bytes> promise;
      {
        std::lock_guard lock(pending_mutex_);
        auto it = pending_.find(d.parcel.request_id);
        if(it == pending_.end())
          continue; // nobody is waiting for it
        promise = std::move(it->second);
        pending_.erase(it);
      }
      if(d.parcel.opcode == Opcode::reply_ok)
        promise.set_value(std::move(payload));
      else if(d.parcel.opcode == Opcode::reply_err)
        promise.set_error(std::make_exception_ptr(wire::decode_error(payload)));
      else
        promise.set_error(std::make_exception_ptr(
            Error(Errc::internal, "unexpected reply opcode " + std::string(to_string(d.parcel.opcode)))));
    }
    socket_.shutdown();
    fail_all(why);
  }

  GlobalId RemoteEndpoint::outgoing(const GlobalId& gid) const
  {
    if(gid.locality != locality_)
      throw Error(Errc::bad_args, gid.to_string() + " does not belong to " + address_);
    return gid.with_locality(0);
  }

  namespace {

    template <typename F>
    auto guarded(F&& f) -> decltype(f())
    {
      using TokenType = decltype(f());
      try {
        return f();
      } catch(...) {
        return TokenType(make_failed<typename TokenType::value_type>(std::current_exception()));
      }
    }

    Unit expect_empty(const Bytes& reply)
    {
      PayloadReader(reply).expect_end();
      return Unit{};
    }

  };

  Token<std::vector<DeviceEntry>> RemoteEndpoint::discover()
  {
    return then(call(Opcode::discover, GlobalId{}, {}), [loc = locality_.load()](const Bytes& reply) {
      auto list = wire::decode_device_list(reply);
      for(auto& e : list)
        e.gid = e.gid.with_locality(loc);
      return list;
    });
  }

  Token<DeviceInfo> RemoteEndpoint::device_info(const GlobalId& device)
  {
    return guarded([&] {
      return then(call(Opcode::device_info, outgoing(device), {}), [](const Bytes& reply) {
        PayloadReader r(reply);
        DeviceInfo info = wire::decode_device_info(r);
        r.expect_end();
        return info;
      });
    });
  }

  Token<StreamId> RemoteEndpoint::create_stream(const GlobalId& device)
  {
    return guarded([&] {
      return then(call(Opcode::create_stream, outgoing(device), {}), [](const Bytes& reply) {
        PayloadReader r(reply);
        StreamId s{r.u32()};
        r.expect_end();
        return s;
      });
    });
  }

  Token<double> RemoteEndpoint::synchronize(const GlobalId& device)
  {
    return guarded([&] {
      return then(call(Opcode::synchronize, outgoing(device), {}), [](const Bytes& reply) {
        PayloadReader r(reply);
        double t = r.f64();
        r.expect_end();
        return t;
      });
    });
  }

  Token<GlobalId> RemoteEndpoint::create_buffer(const GlobalId& device, std::uint64_t size)
  {
    return guarded([&] {
      return then(call(Opcode::create_buffer, outgoing(device), PayloadWriter().u64(size).take()),
                  [loc = locality_.load()](const Bytes& reply) {
                    PayloadReader r(reply);
                    GlobalId g = r.gid();
                    r.expect_end();
                    return g.with_locality(loc);
                  });
    });
  }

  Token<Unit> RemoteEndpoint::write(const GlobalId& buffer, StreamId stream, std::uint64_t offset, Bytes data)
  {
    return guarded([&] {
      PayloadWriter w;
      w.u32(stream.index).u64(offset).raw(data);
      return then(call(Opcode::write, outgoing(buffer), w.take()), expect_empty);
    });
  }

  Token<Bytes> RemoteEndpoint::read(const GlobalId& buffer, StreamId stream, std::uint64_t offset,
                                    std::uint64_t size)
  {
    return guarded([&] {
      PayloadWriter w;
      w.u32(stream.index).u64(offset).u64(size);
      return call(Opcode::read, outgoing(buffer), w.take());
    });
  }

  Token<GlobalId> RemoteEndpoint::create_program(const GlobalId& device, std::string source)
  {
    return guarded([&] {
      return then(call(Opcode::create_program, outgoing(device), PayloadWriter().text(source).take()),
                  [loc = locality_.load()](const Bytes& reply) {
                    PayloadReader r(reply);
                    GlobalId g = r.gid();
                    r.expect_end();
                    return g.with_locality(loc);
                  });
    });
  }

  Token<Unit> RemoteEndpoint::build(const GlobalId& program, std::string kernel)
  {
    return guarded([&] {
      return then(call(Opcode::build, outgoing(program), PayloadWriter().text(kernel).take()), expect_empty);
    });
  }

  Token<Unit> RemoteEndpoint::run(const GlobalId& program, RunRequest request)
  {
    return guarded([&] {
      for(auto& a : request.args)
        if(auto* g = std::get_if<GlobalId>(&a))
          *g = outgoing(*g);
      return then(call(Opcode::run, outgoing(program), wire::encode_run(request)), expect_empty);
    });
  }

  Token<Unit> RemoteEndpoint::unregister(const GlobalId& gid)
  {
    return guarded([&] { return then(call(Opcode::unregister, outgoing(gid), {}), expect_empty); });
  }

}; // namespace offload
