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

#include "offload/parcel.hpp"

#include <bit>
#include <cstring>

namespace offload {

  namespace {

    constexpr std::uint8_t magic[4] = {'P', 'C', 'L', '1'};

    template <typename T>
    void put_le(std::uint8_t* out, T v)
    {
      for(std::size_t i = 0; i < sizeof(T); ++i)
        out[i] = std::uint8_t(std::uint64_t(v) >> (8 * i));
    }

    template <typename T>
    T get_le(const std::uint8_t* in)
    {
      std::uint64_t v = 0;
      for(std::size_t i = 0; i < sizeof(T); ++i)
        v |= std::uint64_t(in[i]) << (8 * i);
      return T(v);
    }

  };

  bool is_known_opcode(std::uint8_t op)
  {
    return (op >= 1 && op <= 11) || op == 128 || op == 129;
  }

  std::string_view to_string(Opcode op)
  {
    switch(op) {
    case Opcode::discover: return "DISCOVER";
    case Opcode::create_buffer: return "CREATE_BUFFER";
    case Opcode::write: return "WRITE";
    case Opcode::read: return "READ";
    case Opcode::create_program: return "CREATE_PROGRAM";
    case Opcode::build: return "BUILD";
    case Opcode::run: return "RUN";
    case Opcode::device_info: return "DEVICE_INFO";
    case Opcode::unregister: return "UNREGISTER";
    case Opcode::create_stream: return "CREATE_STREAM";
    case Opcode::synchronize: return "SYNCHRONIZE";
    case Opcode::reply_ok: return "REPLY_OK";
    case Opcode::reply_err: return "REPLY_ERR";
    }
    return "?";
  }

  std::string_view to_string(DecodeStatus status)
  {
    switch(status) {
    case DecodeStatus::ok: return "ok";
    case DecodeStatus::bad_magic: return "bad-magic";
    case DecodeStatus::truncated_frame: return "truncated-frame";
    case DecodeStatus::unknown_opcode: return "unknown-opcode";
    case DecodeStatus::length_mismatch: return "length-mismatch";
    }
    return "?";
  }

  void encode_header(const Parcel& p, std::uint8_t* out)
  {
    if(p.payload.size() > max_payload_size)
      throw Error(Errc::payload_too_large, std::to_string(p.payload.size()) + " bytes");
    std::memcpy(out, magic, 4);
    put_le<std::uint64_t>(out + 4, p.request_id);
    out[12] = std::uint8_t(p.opcode);
    put_le<std::uint32_t>(out + 13, p.target.locality);
    out[17] = std::uint8_t(p.target.kind);
    put_le<std::uint64_t>(out + 18, p.target.sequence);
    put_le<std::uint32_t>(out + 26, p.target.nonce);
    put_le<std::uint32_t>(out + 30, std::uint32_t(p.payload.size()));
  }

  Bytes encode(const Parcel& p)
  {
    Bytes out(parcel_header_size + p.payload.size());
    encode_header(p, out.data());
    if(!p.payload.empty())
      std::memcpy(out.data() + parcel_header_size, p.payload.data(), p.payload.size());
    return out;
  }

  Decoded decode_header(std::span<const std::uint8_t> in)
  {
    Decoded d;
    if(!in.empty() && std::memcmp(in.data(), magic, std::min<std::size_t>(in.size(), 4)) != 0) {
      d.status = DecodeStatus::bad_magic;
      return d;
    }
    if(in.size() < parcel_header_size) {
      d.status = DecodeStatus::truncated_frame;
      return d;
    }
    d.parcel.request_id = get_le<std::uint64_t>(in.data() + 4);
    d.parcel.opcode = Opcode(in[12]);
    d.parcel.target.locality = get_le<std::uint32_t>(in.data() + 13);
    d.parcel.target.kind = ObjectKind(in[17]);
    d.parcel.target.sequence = get_le<std::uint64_t>(in.data() + 18);
    d.parcel.target.nonce = get_le<std::uint32_t>(in.data() + 26);
    d.payload_len = get_le<std::uint32_t>(in.data() + 30);
    if(!is_known_opcode(in[12]))
      d.status = DecodeStatus::unknown_opcode;
    else if(d.payload_len > max_payload_size)
      d.status = DecodeStatus::length_mismatch;
    return d;
  }

  Decoded decode(std::span<const std::uint8_t> frame)
  {
    Decoded d = decode_header(frame);
    if(d.status != DecodeStatus::ok)
      return d;
    std::size_t total = parcel_header_size + d.payload_len;
    if(frame.size() < total)
      d.status = DecodeStatus::truncated_frame;
    else if(frame.size() > total)
      d.status = DecodeStatus::length_mismatch;
    else
      d.parcel.payload.assign(frame.begin() + parcel_header_size, frame.end());
    return d;
  }

  PayloadWriter& PayloadWriter::u8(std::uint8_t v)
  {
    out_.push_back(v);
    return *this;
  }

  PayloadWriter& PayloadWriter::u32(std::uint32_t v)
  {
    std::uint8_t b[4];
    put_le(b, v);
    out_.insert(out_.end(), b, b + 4);
    return *this;
  }

  PayloadWriter& PayloadWriter::u64(std::uint64_t v)
  {
    std::uint8_t b[8];
    put_le(b, v);
    out_.insert(out_.end(), b, b + 8);
    return *this;
  }

  PayloadWriter& PayloadWriter::f64(double v)
  {
    return u64(std::bit_cast<std::uint64_t>(v));
  }

  PayloadWriter& PayloadWriter::gid(const GlobalId& g)
  {
    u32(g.locality);
    u8(std::uint8_t(g.kind));
    u64(g.sequence);
    return u32(g.nonce);
  }

  PayloadWriter& PayloadWriter::text(std::string_view s)
  {
    u32(std::uint32_t(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
    return *this;
  }

  PayloadWriter& PayloadWriter::raw(std::span<const std::uint8_t> bytes)
  {
    out_.insert(out_.end(), bytes.begin(), bytes.end());
    return *this;
  }

  std::span<const std::uint8_t> PayloadReader::take(std::size_t n)
  {
    if(n > remaining())
      throw Error(Errc::bad_args, "malformed payload: needs " + std::to_string(n) + " more bytes, has " +
                                      std::to_string(remaining()));
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint8_t PayloadReader::u8() { return take(1)[0]; }
  std::uint32_t PayloadReader::u32() { return get_le<std::uint32_t>(take(4).data()); }
  std::uint64_t PayloadReader::u64() { return get_le<std::uint64_t>(take(8).data()); }
  double PayloadReader::f64() { return std::bit_cast<double>(u64()); }

  GlobalId PayloadReader::gid()
  {
    GlobalId g;
    g.locality = u32();
    g.kind = ObjectKind(u8());
    g.sequence = u64();
    g.nonce = u32();
    return g;
  }

  std::string PayloadReader::text()
  {
    auto n = u32();
    auto s = take(n);
    return std::string(s.begin(), s.end());
  }

  Bytes PayloadReader::rest()
  {
    auto s = take(remaining());
    return Bytes(s.begin(), s.end());
  }

  void PayloadReader::expect_end() const
  {
    if(remaining() != 0)
      throw Error(Errc::bad_args, "malformed payload: " + std::to_string(remaining()) + " trailing bytes");
  }

  namespace wire {

    namespace {

      void put_info(PayloadWriter& w, const DeviceInfo& info)
      {
        w.text(info.name).u32(info.capability.major).u32(info.capability.minor);
        w.u64(info.memory_bytes).u32(info.compute_units);
      }

      void put_dim(PayloadWriter& w, const Dim3& d) { w.u32(d.x).u32(d.y).u32(d.z); }

      Dim3 get_dim(PayloadReader& r)
      {
        Dim3 d;
        d.x = r.u32();
        d.y = r.u32();
        d.z = r.u32();
        return d;
      }

      enum ArgTag : std::uint8_t { tag_gid = 0, tag_f64 = 1, tag_u32 = 2 };

    };

    Bytes encode_device_info(const DeviceInfo& info)
    {
      PayloadWriter w;
      put_info(w, info);
      return w.take();
    }

    DeviceInfo decode_device_info(PayloadReader& r)
    {
      DeviceInfo info;
      info.name = r.text();
      info.capability.major = r.u32();
      info.capability.minor = r.u32();
      info.memory_bytes = r.u64();
      info.compute_units = r.u32();
      return info;
    }

    Bytes encode_device_list(const std::vector<DeviceEntry>& devices)
    {
      PayloadWriter w;
      w.u32(std::uint32_t(devices.size()));
      for(const auto& d : devices) {
        w.gid(d.gid);
        put_info(w, d.info);
      }
      return w.take();
    }

    std::vector<DeviceEntry> decode_device_list(std::span<const std::uint8_t> payload)
    {
      PayloadReader r(payload);
      std::uint32_t n = r.u32();
      std::vector<DeviceEntry> out;
      for(std::uint32_t i = 0; i < n; ++i) {
        DeviceEntry e;
        e.gid = r.gid();
        e.info = decode_device_info(r);
        out.push_back(std::move(e));
      }
      r.expect_end();
      return out;
    }

    Bytes encode_run(const RunRequest& req)
    {
      PayloadWriter w;
      w.text(req.kernel);
      put_dim(w, req.grid);
      put_dim(w, req.block);
      w.u32(req.stream.index);
      w.u32(std::uint32_t(req.args.size()));
      for(const auto& a : req.args) {
        if(auto* g = std::get_if<GlobalId>(&a))
          w.u8(tag_gid).gid(*g);
        else if(auto* f = std::get_if<double>(&a))
          w.u8(tag_f64).f64(*f);
        else
          w.u8(tag_u32).u32(std::get<std::uint32_t>(a));
      }
      return w.take();
    }

    RunRequest decode_run(std::span<const std::uint8_t> payload)
    {
      PayloadReader r(payload);
      RunRequest req;
      req.kernel = r.text();
      req.grid = get_dim(r);
      req.block = get_dim(r);
      req.stream.index = r.u32();
      std::uint32_t argc = r.u32();
      for(std::uint32_t i = 0; i < argc; ++i) {
        switch(r.u8()) {
        case tag_gid:
          req.args.emplace_back(r.gid());
          break;
        case tag_f64:
          req.args.emplace_back(r.f64());
          break;
        case tag_u32:
          req.args.emplace_back(r.u32());
          break;
        default:
          throw Error(Errc::bad_args, "malformed payload: unknown argument tag");
        }
      }
      r.expect_end();
      return req;
    }

    std::uint32_t wire_code(Errc code)
    {
      auto v = std::uint32_t(code);
      return v >= 1 && v <= 8 ? v : std::uint32_t(Errc::internal);
    }

    Bytes encode_error(const Error& error)
    {
      PayloadWriter w;
      std::uint32_t code = wire_code(error.code());
      w.u32(code);
      std::string message = error.detail();
      if(code != std::uint32_t(error.code()))
        message = std::string(errc_name(error.code())) + ": " + message;
      w.raw(std::span(reinterpret_cast<const std::uint8_t*>(message.data()), message.size()));
      return w.take();
    }

    Error decode_error(std::span<const std::uint8_t> payload)
    {
      if(payload.size() < 4)
        return Error(Errc::internal, "malformed error reply");
      PayloadReader r(payload);
      std::uint32_t code = r.u32();
      Bytes text = r.rest();
      Errc errc = code >= 1 && code <= 8 ? Errc(code) : Errc::internal;
      return Error(errc, std::string(text.begin(), text.end()));
    }

  }; // namespace wire

}; // namespace offload
