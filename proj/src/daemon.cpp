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

#include "offload/daemon.hpp"

namespace offload {

  namespace {

    void send_reply(const std::shared_ptr<void>& keepalive, net::Socket& socket, std::mutex& send_mutex,
                    std::uint64_t request_id, const Token<Bytes>& result)
    {
      (void)keepalive;
      Parcel reply;
      reply.request_id = request_id;
      if(result.has_value()) {
        reply.opcode = Opcode::reply_ok;
        reply.payload = result.get_ref();
      } else {
        reply.opcode = Opcode::reply_err;
        try {
          std::rethrow_exception(result.error());
        } catch(const Error& e) {
          reply.payload = wire::encode_error(e);
        } catch(const std::exception& e) {
          reply.payload = wire::encode_error(Error(Errc::internal, e.what()));
        } catch(...) {
          reply.payload = wire::encode_error(Error(Errc::internal, "unknown failure"));
        }
      }
      std::uint8_t header[parcel_header_size];
      try {
        encode_header(reply, header);
      } catch(const Error& e) {
        reply.opcode = Opcode::reply_err;
        reply.payload = wire::encode_error(Error(Errc::internal, e.what()));
        encode_header(reply, header);
      }
      std::lock_guard lock(send_mutex);
      if(!socket.send_all(header, sizeof header) ||
         (!reply.payload.empty() && !socket.send_all(reply.payload.data(), reply.payload.size())))
        socket.shutdown();
    }

    Bytes gid_reply(const GlobalId& g) { return PayloadWriter().gid(g).take(); }

    void expect_local(const GlobalId& target)
    {
      if(target.locality != 0)
        throw Error(Errc::unknown_gid, target.to_string() + " is not served here");
    }

  };

  Token<Bytes> Daemon::dispatch(LocalEndpoint& ep, const Parcel& req)
  {
    try {
      PayloadReader in(req.payload);
      const GlobalId& target = req.target;
      switch(req.opcode) {
      case Opcode::discover:
        in.expect_end();
        return then(ep.discover(), [](const std::vector<DeviceEntry>& l) { return wire::encode_device_list(l); });
      case Opcode::device_info:
        in.expect_end();
        expect_local(target);
        return then(ep.device_info(target), [](const DeviceInfo& i) { return wire::encode_device_info(i); });
      case Opcode::create_stream:
        in.expect_end();
        expect_local(target);
        return then(ep.create_stream(target), [](StreamId s) { return PayloadWriter().u32(s.index).take(); });
      case Opcode::synchronize:
        in.expect_end();
        expect_local(target);
        return then(ep.synchronize(target), [](double t) { return PayloadWriter().f64(t).take(); });
      case Opcode::create_buffer: {
        std::uint64_t size = in.u64();
        in.expect_end();
        expect_local(target);
        return then(ep.create_buffer(target, size), gid_reply);
      }
      case Opcode::write: {
        StreamId stream{in.u32()};
        std::uint64_t offset = in.u64();
        Bytes data = in.rest();
        expect_local(target);
        return then(ep.write(target, stream, offset, std::move(data)), [] { return Bytes{}; });
      }
      case Opcode::read: {
        StreamId stream{in.u32()};
        std::uint64_t offset = in.u64();
        std::uint64_t size = in.u64();
        in.expect_end();
        expect_local(target);
        if(size > max_payload_size)
          throw Error(Errc::bad_args, "read of " + std::to_string(size) + " bytes exceeds one frame");
        return ep.read(target, stream, offset, size);
      }
      case Opcode::create_program: {
        std::string source = in.text();
        in.expect_end();
        expect_local(target);
        return then(ep.create_program(target, std::move(source)), gid_reply);
      }
      case Opcode::build: {
        std::string kernel = in.text();
        in.expect_end();
        expect_local(target);
        return then(ep.build(target, std::move(kernel)), [] { return Bytes{}; });
      }
      case Opcode::run: {
        RunRequest run = wire::decode_run(req.payload);
        expect_local(target);
        for(const auto& a : run.args)
          if(auto* g = std::get_if<GlobalId>(&a))
            expect_local(*g);
        return then(ep.run(target, std::move(run)), [] { return Bytes{}; });
      }
      case Opcode::unregister:
        in.expect_end();
        expect_local(target);
        return then(ep.unregister(target), [] { return Bytes{}; });
      case Opcode::reply_ok:
      case Opcode::reply_err:
        break;
      }
      throw Error(Errc::bad_args, std::string(to_string(req.opcode)) + " is not a request");
    } catch(...) {
      return make_failed<Bytes>(std::current_exception());
    }
  }

  Daemon::Daemon(DaemonOptions options)
    : options_(std::move(options))
    , runtime_(options_.runtime)
    , listener_(net::parse_address(options_.listen))
  {}

  Daemon::~Daemon() { stop(); }

  std::string Daemon::address() const
  {
    auto hp = net::parse_address(options_.listen);
    std::string host = hp.host == "0.0.0.0" || hp.host.empty() ? "127.0.0.1" : hp.host;
    return host + ":" + std::to_string(port());
  }

  void Daemon::start()
  {
    acceptor_ = std::thread([this] { accept_loop(); });
  }

  void Daemon::stop()
  {
    std::list<std::shared_ptr<Connection>> conns;
    {
      std::lock_guard lock(mutex_);
      if(stopping_)
        return;
      stopping_ = true;
      conns = connections_;
    }
    listener_.shutdown();
    if(acceptor_.joinable())
      acceptor_.join();
    {
      std::lock_guard lock(mutex_);
      conns = connections_;
    }
    for(auto& c : conns)
      c->socket.shutdown();
    for(auto& c : conns)
      if(c->reader.joinable())
        c->reader.join();
  }

  void Daemon::accept_loop()
  {
    for(;;) {
      net::Socket s = listener_.accept();
      if(!s.valid())
        return;
      auto conn = std::make_shared<Connection>();
      conn->socket = std::move(s);
      std::lock_guard lock(mutex_);
      if(stopping_)
        return;
      // reap connections that have ended
      connections_.remove_if([](const std::shared_ptr<Connection>& c) {
        if(!c->done)
          return false;
        c->reader.join();
        return true;
      });
      connections_.push_back(conn);
      conn->reader = std::thread([this, conn] { serve(conn); });
    }
  }

  void Daemon::serve(const std::shared_ptr<Connection>& conn)
  {
    LocalEndpoint& ep = *runtime_.local();
    std::uint8_t header[parcel_header_size];
    while(conn->socket.recv_exact(header, sizeof header)) {
      Decoded d = decode_header(header);
      if(d.status == DecodeStatus::bad_magic || d.status == DecodeStatus::length_mismatch)
        break; // framing is lost
      Bytes payload(d.payload_len);
      if(!payload.empty() && !conn->socket.recv_exact(payload.data(), payload.size()))
        break;
      std::uint64_t request_id = d.parcel.request_id;

      Token<Bytes> result;
      if(d.status == DecodeStatus::unknown_opcode) {
        result = make_failed<Bytes>(Error(Errc::bad_args, "unknown opcode " + std::to_string(header[12])));
      } else {
        d.parcel.payload = std::move(payload);
        result = dispatch(ep, d.parcel);
      }
      result.on_complete([conn, request_id, result]() {
        send_reply(conn, conn->socket, conn->send_mutex, request_id, result);
      });
    }
    conn->socket.shutdown();
    conn->done = true;
  }

}; // namespace offload
