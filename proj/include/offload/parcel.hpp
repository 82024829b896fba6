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

// Parcel framing. Every frame is a 34-byte little-endian header followed by
//  the payload:
//
//    offset  size  field
//         0     4  magic "PCL1"
//         4     8  request_id
//        12     1  opcode
//        13     4  target locality
//        17     1  target kind
//        18     8  target sequence
//        26     4  target nonce
//        30     4  payload_len
//        34     n  payload
//
// Replies echo the request_id. REPLY_ERR carries u32 code + message text.

#ifndef OFFLOAD_PARCEL_HPP
#define OFFLOAD_PARCEL_HPP

#include "offload/error.hpp"
#include "offload/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace offload {

  enum class Opcode : std::uint8_t {
    discover = 1,
    create_buffer = 2,
    write = 3,
    read = 4,
    create_program = 5,
    build = 6,
    run = 7,
    device_info = 8,
    unregister = 9,
    create_stream = 10,
    synchronize = 11,
    reply_ok = 128,
    reply_err = 129,
  };

  bool is_known_opcode(std::uint8_t op);
  std::string_view to_string(Opcode op);

  inline constexpr std::size_t parcel_header_size = 34;
  inline constexpr std::uint64_t max_payload_size = std::uint64_t(1) << 31;

  struct Parcel {
    std::uint64_t request_id = 0;
    Opcode opcode = Opcode::discover;
    GlobalId target;
    Bytes payload;

    friend bool operator==(const Parcel&, const Parcel&) = default;
  };

  // throws Error(payload_too_large)
  Bytes encode(const Parcel& parcel);
  void encode_header(const Parcel& parcel, std::uint8_t* out); // out has parcel_header_size bytes

  enum class DecodeStatus : std::uint8_t { ok, bad_magic, truncated_frame, unknown_opcode, length_mismatch };

  std::string_view to_string(DecodeStatus status);

  struct Decoded {
    DecodeStatus status = DecodeStatus::ok;
    Parcel parcel;                // complete when status == ok
    std::uint32_t payload_len = 0; // as announced by the header
  };

  // Decodes exactly one frame; trailing bytes are a length mismatch.
  Decoded decode(std::span<const std::uint8_t> frame);

  // Validates a header on its own and fills everything but the payload.
  //  Fewer than parcel_header_size bytes is a truncated frame. The fields are
  //  filled for unknown_opcode too, so the request can still be answered.
  Decoded decode_header(std::span<const std::uint8_t> header);

  // Payload field codecs.
  class PayloadWriter {
  public:
    PayloadWriter& u8(std::uint8_t v);
    PayloadWriter& u32(std::uint32_t v);
    PayloadWriter& u64(std::uint64_t v);
    PayloadWriter& f64(double v);
    PayloadWriter& gid(const GlobalId& g);
    PayloadWriter& text(std::string_view s); // u32 length + bytes
    PayloadWriter& raw(std::span<const std::uint8_t> bytes);

    Bytes take() { return std::move(out_); }

  private:
    Bytes out_;
  };

  // Throws Error(bad_args) on a short or malformed payload.
  class PayloadReader {
  public:
    explicit PayloadReader(std::span<const std::uint8_t> in)
      : in_(in)
    {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    GlobalId gid();
    std::string text();
    Bytes rest();

    std::size_t remaining() const { return in_.size() - pos_; }
    void expect_end() const;

  private:
    std::span<const std::uint8_t> take(std::size_t n);

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
  };

  // Typed payloads shared by the client proxy and the daemon.
  namespace wire {

    Bytes encode_device_info(const DeviceInfo& info);
    DeviceInfo decode_device_info(PayloadReader& in);

    Bytes encode_device_list(const std::vector<DeviceEntry>& devices);
    std::vector<DeviceEntry> decode_device_list(std::span<const std::uint8_t> payload);

    Bytes encode_run(const RunRequest& request);
    RunRequest decode_run(std::span<const std::uint8_t> payload);

    // u32 code + message text
    Bytes encode_error(const Error& error);
    Error decode_error(std::span<const std::uint8_t> payload);

    // the code an error travels under; codes outside the wire set become internal
    std::uint32_t wire_code(Errc code);

  }; // namespace wire

}; // namespace offload

#endif
