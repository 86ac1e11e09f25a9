/*
 * Copyright (c) 2026 The agectl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at:
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "agectl/wire.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace agectl {
namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint64_t get_be(std::span<const std::uint8_t> bytes, std::size_t offset,
                     std::size_t width) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v = (v << 8) | bytes[offset + i];
  return v;
}

void put_common(std::vector<std::uint8_t>& out, std::uint8_t version,
                std::uint32_t seq, std::uint64_t gen_ts_ns) {
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(version);
  put_u32(out, seq);
  put_u64(out, gen_ts_ns);
}

// Checks the 17-byte prefix shared by both packet kinds.
WireError check_common(std::span<const std::uint8_t> bytes, std::size_t min_size) {
  if (bytes.size() < min_size) return WireError::kTruncated;
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    return WireError::kBadMagic;
  if (bytes[4] != kWireVersion) return WireError::kUnsupportedVersion;
  return WireError::kNone;
}

}  // namespace

const char* to_string(WireError e) noexcept {
  switch (e) {
    case WireError::kNone: return "ok";
    case WireError::kTruncated: return "Truncated";
    case WireError::kBadMagic: return "BadMagic";
    case WireError::kUnsupportedVersion: return "UnsupportedVersion";
    case WireError::kLengthMismatch: return "LengthMismatch";
  }
  return "unknown";
}

std::vector<std::uint8_t> encode_update(const UpdatePacket& pkt) {
  if (pkt.payload.size() > kMaxPayload)
    throw Error(ErrorCode::kOversize,
                "update payload of " + std::to_string(pkt.payload.size()) +
                    " bytes exceeds " + std::to_string(kMaxPayload));
  std::vector<std::uint8_t> out;
  out.reserve(pkt.encoded_size());
  put_common(out, pkt.version, pkt.seq, pkt.gen_ts_ns);
  put_u16(out, static_cast<std::uint16_t>(pkt.payload.size()));
  out.insert(out.end(), pkt.payload.begin(), pkt.payload.end());
  return out;
}

std::vector<std::uint8_t> encode_ack(const AckPacket& ack) {
  std::vector<std::uint8_t> out;
  out.reserve(kAckSize);
  put_common(out, ack.version, ack.seq, ack.gen_ts_ns);
  return out;
}

Decoded<UpdatePacket> decode_update(std::span<const std::uint8_t> bytes) {
  Decoded<UpdatePacket> result;
  result.error = check_common(bytes, kUpdateHeaderSize);
  if (result.error != WireError::kNone) return result;
  const auto payload_len = static_cast<std::size_t>(get_be(bytes, 17, 2));
  if (bytes.size() != kUpdateHeaderSize + payload_len) {
    result.error = WireError::kLengthMismatch;
    return result;
  }
  UpdatePacket pkt;
  pkt.version = bytes[4];
  pkt.seq = static_cast<std::uint32_t>(get_be(bytes, 5, 4));
  pkt.gen_ts_ns = get_be(bytes, 9, 8);
  pkt.payload.assign(bytes.begin() + kUpdateHeaderSize, bytes.end());
  result.packet = std::move(pkt);
  return result;
}

Decoded<AckPacket> decode_ack(std::span<const std::uint8_t> bytes) {
  Decoded<AckPacket> result;
  result.error = check_common(bytes, kAckSize);
  if (result.error != WireError::kNone) return result;
  if (bytes.size() != kAckSize) {
    result.error = WireError::kLengthMismatch;
    return result;
  }
  AckPacket ack;
  ack.version = bytes[4];
  ack.seq = static_cast<std::uint32_t>(get_be(bytes, 5, 4));
  ack.gen_ts_ns = get_be(bytes, 9, 8);
  result.packet = ack;
  return result;
}

std::uint64_t seconds_to_ns(double seconds) {
  if (!(seconds > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::llround(seconds * 1e9));
}

double ns_to_seconds(std::uint64_t ns) { return static_cast<double>(ns) * 1e-9; }

}  // namespace agectl
