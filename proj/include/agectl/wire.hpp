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

// Update / ACK datagram formats. See docs/protocol.md for the byte layout.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "agectl/error.hpp"

namespace agectl {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'A', 'C', 'P', '+'};
inline constexpr std::uint8_t kWireVersion = 1;

inline constexpr std::size_t kUpdateHeaderSize = 19;
inline constexpr std::size_t kAckSize = 17;
inline constexpr std::size_t kMaxDatagram = 65507;
inline constexpr std::size_t kMaxPayload = kMaxDatagram - kUpdateHeaderSize;
inline constexpr std::size_t kDefaultPayloadBytes = 1024;

struct UpdatePacket {
  std::uint8_t version = kWireVersion;
  std::uint32_t seq = 0;
  std::uint64_t gen_ts_ns = 0;  // sender clock, ns since session epoch
  std::vector<std::uint8_t> payload;

  std::size_t encoded_size() const { return kUpdateHeaderSize + payload.size(); }
  friend bool operator==(const UpdatePacket&, const UpdatePacket&) = default;
};

struct AckPacket {
  std::uint8_t version = kWireVersion;
  std::uint32_t seq = 0;
  std::uint64_t gen_ts_ns = 0;

  friend bool operator==(const AckPacket&, const AckPacket&) = default;
};

enum class WireError {
  kNone = 0,
  kTruncated,
  kBadMagic,
  kUnsupportedVersion,
  kLengthMismatch,
};

const char* to_string(WireError e) noexcept;

template <typename Packet>
struct Decoded {
  std::optional<Packet> packet;
  WireError error = WireError::kNone;

  explicit operator bool() const { return packet.has_value(); }
};

// Throws Error(kOversize) when the payload exceeds kMaxPayload.
std::vector<std::uint8_t> encode_update(const UpdatePacket& pkt);
std::vector<std::uint8_t> encode_ack(const AckPacket& ack);

// Never reads past `bytes`. Decoding only accepts kWireVersion.
Decoded<UpdatePacket> decode_update(std::span<const std::uint8_t> bytes);
Decoded<AckPacket> decode_ack(std::span<const std::uint8_t> bytes);

// Seconds <-> wire nanoseconds. Negative times clamp to zero.
std::uint64_t seconds_to_ns(double seconds);
double ns_to_seconds(std::uint64_t ns);

}  // namespace agectl
