#include "agectl/wire.hpp"

#include <random>

#include "doctest.h"

using namespace agectl;

TEST_CASE("empty update encodes to the bare header") {
  UpdatePacket pkt;
  const auto bytes = encode_update(pkt);
  REQUIRE(bytes.size() == 19);
  CHECK(bytes[0] == 'A');
  CHECK(bytes[3] == '+');
  CHECK(bytes[4] == kWireVersion);
  CHECK(bytes[17] == 0x00);
  CHECK(bytes[18] == 0x00);
}

TEST_CASE("update layout offsets") {
  UpdatePacket pkt;
  pkt.seq = 1;
  pkt.gen_ts_ns = 1'000'000'000ULL;  // 0x3B9ACA00
  pkt.payload.assign(1024, 0);
  const auto bytes = encode_update(pkt);
  REQUIRE(bytes.size() == 1043);
  CHECK(bytes[5] == 0x00);
  CHECK(bytes[6] == 0x00);
  CHECK(bytes[7] == 0x00);
  CHECK(bytes[8] == 0x01);
  const std::uint8_t ts[8] = {0, 0, 0, 0, 0x3B, 0x9A, 0xCA, 0x00};
  for (int i = 0; i < 8; ++i) CHECK(bytes[9 + i] == ts[i]);
  CHECK(bytes[17] == 0x04);
  CHECK(bytes[18] == 0x00);
}

TEST_CASE("oversize payload is rejected") {
  UpdatePacket pkt;
  pkt.payload.assign(kMaxPayload + 1, 0);
  CHECK_THROWS_AS(encode_update(pkt), Error);
  pkt.payload.resize(kMaxPayload);
  CHECK(encode_update(pkt).size() == kMaxDatagram);
}

TEST_CASE("update decode errors") {
  UpdatePacket pkt;
  pkt.seq = 9;
  pkt.payload = {1, 2, 3};
  auto bytes = encode_update(pkt);

  CHECK(decode_update(std::span(bytes).first(10)).error == WireError::kTruncated);

  auto bad_magic = bytes;
  bad_magic[1] ^= 0xFF;
  CHECK(decode_update(bad_magic).error == WireError::kBadMagic);

  auto bad_version = bytes;
  bad_version[4] = 7;
  CHECK(decode_update(bad_version).error == WireError::kUnsupportedVersion);

  auto longer = bytes;
  longer.push_back(0);
  CHECK(decode_update(longer).error == WireError::kLengthMismatch);
  CHECK(decode_update(std::span(bytes).first(bytes.size() - 1)).error ==
        WireError::kLengthMismatch);

  // Every strict prefix fails cleanly.
  for (std::size_t n = 0; n < bytes.size(); ++n)
    CHECK_FALSE(decode_update(std::span(bytes).first(n)));
}

TEST_CASE("ack layout and errors") {
  AckPacket ack;
  ack.seq = 7;
  ack.gen_ts_ns = 42;
  const auto bytes = encode_ack(ack);
  REQUIRE(bytes.size() == 17);
  CHECK(bytes[8] == 7);
  CHECK(bytes[16] == 42);
  const auto back = decode_ack(bytes);
  REQUIRE(back);
  CHECK(*back.packet == ack);

  CHECK(decode_ack(std::span(bytes).first(16)).error == WireError::kTruncated);
  auto corrupted = bytes;
  corrupted[0] = 'X';
  CHECK(decode_ack(corrupted).error == WireError::kBadMagic);
  // An update is never mistaken for an ACK.
  CHECK(decode_ack(encode_update(UpdatePacket{})).error == WireError::kLengthMismatch);
}

TEST_CASE("randomized packets round-trip byte-exactly") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(0, 2048);
  for (int i = 0; i < 500; ++i) {
    UpdatePacket pkt;
    pkt.seq = static_cast<std::uint32_t>(rng());
    pkt.gen_ts_ns = rng();
    pkt.payload.resize(len(rng));
    for (auto& b : pkt.payload) b = static_cast<std::uint8_t>(rng());
    const auto bytes = encode_update(pkt);
    CHECK(bytes.size() == 19 + pkt.payload.size());
    const auto decoded = decode_update(bytes);
    REQUIRE(decoded);
    CHECK(*decoded.packet == pkt);
    CHECK(encode_update(*decoded.packet) == bytes);

    AckPacket ack{kWireVersion, pkt.seq, pkt.gen_ts_ns};
    const auto ack_bytes = encode_ack(ack);
    const auto ack_back = decode_ack(ack_bytes);
    REQUIRE(ack_back);
    CHECK(encode_ack(*ack_back.packet) == ack_bytes);
  }
}

TEST_CASE("seconds to wire nanoseconds") {
  CHECK(seconds_to_ns(0.0) == 0);
  CHECK(seconds_to_ns(-1.0) == 0);
  CHECK(seconds_to_ns(1.5) == 1'500'000'000ULL);
  CHECK(ns_to_seconds(250'000'000ULL) == doctest::Approx(0.25));
}
