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

#include "support/util.hpp"
#include "support/wire_props.hpp"

#include "offload/parcel.hpp"

#include <doctest.h>

#include <cmath>

using namespace offload;

TEST_CASE("discover with no payload is a bare header")
{
  Parcel p;
  p.request_id = 1;
  p.opcode = Opcode::discover;
  auto f = encode(p);
  CHECK(f.size() == 34);
  CHECK(f == wireprops::reference_frame(p));
}

TEST_CASE("an 8-byte write is a 42-byte frame announcing 8")
{
  Parcel p;
  p.opcode = Opcode::write;
  p.target = GlobalId{0, ObjectKind::buffer, 12, 99};
  p.payload = Bytes(8, 7);
  auto f = encode(p);
  CHECK(f.size() == 42);
  CHECK(f[30] == 8);
  CHECK(f[31] == 0);
  CHECK(f[32] == 0);
  CHECK(f[33] == 0);
  auto d = decode(f);
  REQUIRE(d.status == DecodeStatus::ok);
  CHECK(d.parcel == p);
}

TEST_CASE("roundtrip over random parcels")
{
  std::mt19937_64 rng(21);
  auto r = wireprops::roundtrip(rng, 20000);
  CHECK_MESSAGE(r.violations == 0, r.first);
}

TEST_CASE("malformed frames get structured errors")
{
  Parcel p;
  p.opcode = Opcode::read;
  p.payload = Bytes(16, 1);
  Bytes good = encode(p);

  Bytes bad = good;
  bad[0] = 'X';
  CHECK(decode(bad).status == DecodeStatus::bad_magic);

  Bytes cut(good.begin(), good.end() - 3);
  CHECK(decode(cut).status == DecodeStatus::truncated_frame);
  CHECK(decode(Bytes(good.begin(), good.begin() + 20)).status == DecodeStatus::truncated_frame);
  CHECK(decode(Bytes{}).status == DecodeStatus::truncated_frame);

  Bytes extra = good;
  extra.push_back(0);
  CHECK(decode(extra).status == DecodeStatus::length_mismatch);

  Bytes op = good;
  op[12] = 42;
  auto d = decode(op);
  CHECK(d.status == DecodeStatus::unknown_opcode);
  // the header is still readable so the request can be answered
  auto h = decode_header(op);
  CHECK(h.status == DecodeStatus::unknown_opcode);
  CHECK(h.parcel.request_id == p.request_id);
  CHECK(h.payload_len == 16);
}

TEST_CASE("fuzzed frames never escape as exceptions")
{
  std::mt19937_64 rng(22);
  auto r = wireprops::fuzz(rng, 20000);
  CHECK_MESSAGE(r.violations == 0, r.first);
}

TEST_CASE("payload fields roundtrip")
{
  GlobalId g{3, ObjectKind::program, 1ull << 40, 0xdeadbeef};
  Bytes b = PayloadWriter().u8(9).u32(0x01020304).u64(~0ull).f64(-0.125).gid(g).text("héllo").take();
  PayloadReader in(b);
  CHECK(in.u8() == 9);
  CHECK(in.u32() == 0x01020304);
  CHECK(in.u64() == ~0ull);
  CHECK(in.f64() == -0.125);
  CHECK(in.gid() == g);
  CHECK(in.text() == "héllo");
  in.expect_end();

  PayloadReader shortr(std::span<const std::uint8_t>(b.data(), 3));
  CHECK(testing::thrown_code([&] { shortr.u32(); }) == Errc::bad_args);
  PayloadReader left(b);
  left.u8();
  CHECK(testing::thrown_code([&] { left.expect_end(); }) == Errc::bad_args);
}

TEST_CASE("typed payloads roundtrip")
{
  DeviceInfo info{"gpu-7", {3, 5}, 1ull << 34, 80};
  Bytes encoded = wire::encode_device_info(info);
  PayloadReader in(encoded);
  CHECK(wire::decode_device_info(in) == info);

  std::vector<DeviceEntry> list{{GlobalId{0, ObjectKind::device, 1, 5}, info},
                                {GlobalId{0, ObjectKind::device, 2, 5}, DeviceInfo{"b", {1, 0}, 10, 1}}};
  auto back = wire::decode_device_list(wire::encode_device_list(list));
  REQUIRE(back.size() == 2);
  CHECK(back[1].gid == list[1].gid);
  CHECK(back[1].info == list[1].info);

  RunRequest run{"k", {GlobalId{0, ObjectKind::buffer, 4, 5}, 2.5, std::uint32_t(7)}, {4, 2, 1}, {32, 1, 1}, {3}};
  auto r = wire::decode_run(wire::encode_run(run));
  CHECK(r.kernel == "k");
  CHECK(r.args == run.args);
  CHECK(r.grid == run.grid);
  CHECK(r.block == run.block);
  CHECK(r.stream == run.stream);

  for(auto code : {Errc::unknown_gid, Errc::bad_args, Errc::compile_error, Errc::oob_access, Errc::internal,
                   Errc::not_built, Errc::launch_config, Errc::out_of_memory}) {
    auto e = wire::decode_error(wire::encode_error(Error(code, "why")));
    CHECK(e.code() == code);
    CHECK(e.detail() == "why");
  }
  auto local = wire::decode_error(wire::encode_error(Error(Errc::io_error, "disk")));
  CHECK(local.code() == Errc::internal);
  CHECK(local.detail().find("disk") != std::string::npos);
}

TEST_CASE("a header announcing more than the payload limit is rejected")
{
  Parcel p;
  p.payload.resize(16);
  std::uint8_t hdr[parcel_header_size];
  encode_header(p, hdr);
  CHECK(decode_header(std::span<const std::uint8_t>(hdr, parcel_header_size)).payload_len == 16);
  hdr[30] = hdr[31] = hdr[32] = hdr[33] = 0xff;
  CHECK(decode_header(std::span<const std::uint8_t>(hdr, parcel_header_size)).status ==
        DecodeStatus::length_mismatch);
}
