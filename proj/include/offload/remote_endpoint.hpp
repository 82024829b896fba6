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

#ifndef OFFLOAD_REMOTE_ENDPOINT_HPP
#define OFFLOAD_REMOTE_ENDPOINT_HPP

#include "offload/endpoint.hpp"
#include "offload/net.hpp"
#include "offload/parcel.hpp"

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace offload {

  // Client side of one daemon connection. Requests are pipelined over a
  //  single socket; a reader thread completes tokens as replies arrive, in
  //  whatever order the daemon sends them.
  //
  // The endpoint stays alive until the connection ends, so owners must call
  //  close() when done with it.
  //
  // The daemon names its own objects with locality 0. Outgoing GIDs are
  //  rewritten to 0 and incoming ones to this endpoint's locality id.
  class RemoteEndpoint final : public Endpoint {
  public:
    // throws Error(connection_refused)
    static std::shared_ptr<RemoteEndpoint> connect(const std::string& address);

    ~RemoteEndpoint() override;

    void set_locality(std::uint32_t id) { locality_ = id; }
    std::uint32_t locality() const override { return locality_; }
    const std::string& address() const { return address_; }

    // called once, from the reader thread, when the connection drops
    void on_disconnect(std::function<void()> callback);
    bool connected() const { return !closed_.load(); }

    // drops the connection; pending tokens fail with transport_lost
    void close();

    Token<std::vector<DeviceEntry>> discover() override;
    Token<DeviceInfo> device_info(const GlobalId& device) override;
    Token<StreamId> create_stream(const GlobalId& device) override;
    Token<double> synchronize(const GlobalId& device) override;

    Token<GlobalId> create_buffer(const GlobalId& device, std::uint64_t size) override;
    Token<Unit> write(const GlobalId& buffer, StreamId stream, std::uint64_t offset, Bytes data) override;
    Token<Bytes> read(const GlobalId& buffer, StreamId stream, std::uint64_t offset,
                      std::uint64_t size) override;

    Token<GlobalId> create_program(const GlobalId& device, std::string source) override;
    Token<Unit> build(const GlobalId& program, std::string kernel) override;
    Token<Unit> run(const GlobalId& program, RunRequest request) override;

    Token<Unit> unregister(const GlobalId& gid) override;

    // Sends one request and completes with the REPLY_OK payload. Public for
    //  protocol-level tests.
    Token<Bytes> call(Opcode opcode, const GlobalId& target, Bytes payload);

  private:
    RemoteEndpoint(std::string address, net::Socket socket);

    void reader_loop();
    void fail_all(const std::string& why);
    GlobalId outgoing(const GlobalId& gid) const;

    std::string address_;
    std::atomic<std::uint32_t> locality_{0};
    net::Socket socket_;
    std::mutex send_mutex_;
    std::mutex pending_mutex_;
    std::unordered_map<std::uint64_t, Promise<Bytes>> pending_;
    std::uint64_t next_request_ = 1;
    std::atomic<bool> closed_{false};
    std::function<void()> on_disconnect_;
    std::thread reader_;
  };

}; // namespace offload

#endif
