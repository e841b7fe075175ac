// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <variant>
#include <vector>

#include "mrv/error.hpp"
#include "mrv/net.hpp"

// Wire format (all integers big-endian):
//
//   header (10 bytes): magic 45 56 45 52 | version u8 = 1 | type u8
//                      | payload length u32
//
//   1 SessionInit    model_id u32, step_index u32, step_class u32
//   2 ReferenceFrame alpha_milli u16, codec u8 (0 = lossless, 1..100 =
//                    lossy quality), point_count u16, points (f32 x, f32 y)*,
//                    payload_len u32, payload bytes
//   3 TargetFrame    point_count u16, points*, payload_len u32, payload
//   4 VerifyResult   pass u8, iou_micro u32, server_decode_us u32,
//                    server_postproc_us u32
//   5 StepControl    next_step u32
//   6 Error          code u16, msg_len u16, utf8 bytes
//
// Strings are length-prefixed UTF-8. Every message round-trips bit-exactly.

namespace mrv {

constexpr std::array<uint8_t, 4> kWireMagic{0x45, 0x56, 0x45, 0x52};
constexpr uint8_t kWireVersion = 1;
constexpr size_t kWireHeaderSize = 10;
constexpr uint32_t kWireMaxPayload = 64u << 20;

enum class MsgType : uint8_t {
  SessionInit = 1,
  ReferenceFrame = 2,
  TargetFrame = 3,
  VerifyResult = 4,
  StepControl = 5,
  Error = 6,
};

enum class WireErrorCode : uint16_t {
  OutOfOrder = 1,
  MalformedPayload = 2,
  SegmenterFault = 3,
  VerificationFault = 4,
  Internal = 5,
};

struct SessionInitMsg {
  uint32_t model_id = 0;
  uint32_t step_index = 0;
  uint32_t step_class = 0;
  bool operator==(const SessionInitMsg&) const = default;
};

struct ReferenceFrameMsg {
  uint16_t alpha_milli = 1000;
  uint8_t codec = 0;  // 0 = lossless, 1..100 = lossy quality
  std::vector<std::pair<float, float>> alignment_points;
  std::vector<uint8_t> payload;
  bool operator==(const ReferenceFrameMsg&) const = default;
};

struct TargetFrameMsg {
  std::vector<std::pair<float, float>> alignment_points;
  std::vector<uint8_t> payload;
  bool operator==(const TargetFrameMsg&) const = default;
};

struct VerifyResultMsg {
  uint8_t pass = 0;
  uint32_t iou_micro = 0;  // <= 1,000,000
  uint32_t server_decode_us = 0;
  uint32_t server_postproc_us = 0;
  bool operator==(const VerifyResultMsg&) const = default;
};

struct StepControlMsg {
  uint32_t next_step = 0;
  bool operator==(const StepControlMsg&) const = default;
};

struct ErrorMsg {
  uint16_t code = 0;
  std::string message;
  bool operator==(const ErrorMsg&) const = default;
};

using WireMessage = std::variant<SessionInitMsg, ReferenceFrameMsg, TargetFrameMsg,
                                 VerifyResultMsg, StepControlMsg, ErrorMsg>;

namespace wire {

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}
inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}
inline void put_f32(std::vector<uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<uint32_t>(v));
}

struct Cursor {
  const uint8_t* data;
  size_t size;
  size_t pos = 0;

  void require(size_t n) const {
    if (pos + n > size) raise(Errc::TruncatedPayload, "payload shorter than declared fields");
  }
  uint8_t u8() {
    require(1);
    return data[pos++];
  }
  uint16_t u16() {
    require(2);
    uint16_t v = (uint16_t(data[pos]) << 8) | data[pos + 1];
    pos += 2;
    return v;
  }
  uint32_t u32() {
    require(4);
    uint32_t v = (uint32_t(data[pos]) << 24) | (uint32_t(data[pos + 1]) << 16) |
                 (uint32_t(data[pos + 2]) << 8) | data[pos + 3];
    pos += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::vector<uint8_t> bytes(size_t n) {
    require(n);
    std::vector<uint8_t> v(data + pos, data + pos + n);
    pos += n;
    return v;
  }
};

inline void put_points(std::vector<uint8_t>& out,
                       const std::vector<std::pair<float, float>>& pts) {
  if (pts.size() > 0xffff) raise(Errc::ConfigInvalid, "too many alignment points");
  put_u16(out, static_cast<uint16_t>(pts.size()));
  for (const auto& [x, y] : pts) {
    put_f32(out, x);
    put_f32(out, y);
  }
}

inline std::vector<std::pair<float, float>> get_points(Cursor& c) {
  uint16_t n = c.u16();
  std::vector<std::pair<float, float>> pts(n);
  for (auto& [x, y] : pts) {
    x = c.f32();
    y = c.f32();
  }
  return pts;
}

inline void put_payload(std::vector<uint8_t>& out, const std::vector<uint8_t>& payload) {
  put_u32(out, static_cast<uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
}

inline std::vector<uint8_t> get_payload(Cursor& c) { return c.bytes(c.u32()); }

}  // namespace wire

inline MsgType message_type(const WireMessage& m) {
  return static_cast<MsgType>(m.index() + 1);
}

inline std::vector<uint8_t> encode_payload(const WireMessage& m) {
  std::vector<uint8_t> out;
  std::visit(
      [&out](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, SessionInitMsg>) {
          wire::put_u32(out, msg.model_id);
          wire::put_u32(out, msg.step_index);
          wire::put_u32(out, msg.step_class);
        } else if constexpr (std::is_same_v<T, ReferenceFrameMsg>) {
          wire::put_u16(out, msg.alpha_milli);
          out.push_back(msg.codec);
          wire::put_points(out, msg.alignment_points);
          wire::put_payload(out, msg.payload);
        } else if constexpr (std::is_same_v<T, TargetFrameMsg>) {
          wire::put_points(out, msg.alignment_points);
          wire::put_payload(out, msg.payload);
        } else if constexpr (std::is_same_v<T, VerifyResultMsg>) {
          if (msg.iou_micro > 1000000u)
            raise(Errc::ConfigInvalid, "iou_micro exceeds 1,000,000");
          out.push_back(msg.pass);
          wire::put_u32(out, msg.iou_micro);
          wire::put_u32(out, msg.server_decode_us);
          wire::put_u32(out, msg.server_postproc_us);
        } else if constexpr (std::is_same_v<T, StepControlMsg>) {
          wire::put_u32(out, msg.next_step);
        } else if constexpr (std::is_same_v<T, ErrorMsg>) {
          if (msg.message.size() > 0xffff)
            raise(Errc::ConfigInvalid, "error message too long");
          wire::put_u16(out, msg.code);
          wire::put_u16(out, static_cast<uint16_t>(msg.message.size()));
          out.insert(out.end(), msg.message.begin(), msg.message.end());
        }
      },
      m);
  return out;
}

inline WireMessage decode_payload(MsgType type, const uint8_t* data, size_t size) {
  wire::Cursor c{data, size};
  WireMessage out;
  switch (type) {
    case MsgType::SessionInit: {
      SessionInitMsg m;
      m.model_id = c.u32();
      m.step_index = c.u32();
      m.step_class = c.u32();
      out = m;
      break;
    }
    case MsgType::ReferenceFrame: {
      ReferenceFrameMsg m;
      m.alpha_milli = c.u16();
      m.codec = c.u8();
      m.alignment_points = wire::get_points(c);
      m.payload = wire::get_payload(c);
      out = m;
      break;
    }
    case MsgType::TargetFrame: {
      TargetFrameMsg m;
      m.alignment_points = wire::get_points(c);
      m.payload = wire::get_payload(c);
      out = m;
      break;
    }
    case MsgType::VerifyResult: {
      VerifyResultMsg m;
      m.pass = c.u8();
      m.iou_micro = c.u32();
      m.server_decode_us = c.u32();
      m.server_postproc_us = c.u32();
      out = m;
      break;
    }
    case MsgType::StepControl: {
      StepControlMsg m;
      m.next_step = c.u32();
      out = m;
      break;
    }
    case MsgType::Error: {
      ErrorMsg m;
      m.code = c.u16();
      uint16_t len = c.u16();
      auto raw = c.bytes(len);
      m.message.assign(raw.begin(), raw.end());
      out = m;
      break;
    }
    default:
      raise(Errc::UnknownType, "unknown message type " + std::to_string(int(type)));
  }
  if (c.pos != size) raise(Errc::TruncatedPayload, "trailing bytes after payload");
  return out;
}

inline std::vector<uint8_t> encode_message(const WireMessage& m) {
  std::vector<uint8_t> payload = encode_payload(m);
  std::vector<uint8_t> out;
  out.reserve(kWireHeaderSize + payload.size());
  for (uint8_t b : kWireMagic) out.push_back(b);
  out.push_back(kWireVersion);
  out.push_back(static_cast<uint8_t>(message_type(m)));
  wire::put_u32(out, static_cast<uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

namespace wire {

inline MsgType check_header(const uint8_t* h, uint32_t& length_out) {
  if (std::memcmp(h, kWireMagic.data(), 4) != 0)
    raise(Errc::BadMagic, "bad frame magic");
  if (h[4] != kWireVersion)
    raise(Errc::UnsupportedVersion, "protocol version " + std::to_string(h[4]));
  uint8_t t = h[5];
  if (t < 1 || t > 6) raise(Errc::UnknownType, "unknown message type " + std::to_string(t));
  length_out = (uint32_t(h[6]) << 24) | (uint32_t(h[7]) << 16) | (uint32_t(h[8]) << 8) |
               uint32_t(h[9]);
  if (length_out > kWireMaxPayload) raise(Errc::TruncatedPayload, "oversized payload");
  return static_cast<MsgType>(t);
}

}  // namespace wire

inline WireMessage decode_message(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < kWireHeaderSize) raise(Errc::TruncatedPayload, "short frame header");
  uint32_t length = 0;
  MsgType type = wire::check_header(bytes.data(), length);
  if (bytes.size() != kWireHeaderSize + length)
    raise(Errc::TruncatedPayload, "frame length mismatch");
  return decode_payload(type, bytes.data() + kWireHeaderSize, length);
}

inline void send_message(TcpStream& stream, const WireMessage& m) {
  auto bytes = encode_message(m);
  stream.write_all(bytes.data(), bytes.size());
}

inline WireMessage recv_message(TcpStream& stream) {
  std::array<uint8_t, kWireHeaderSize> header;
  stream.read_exact(header.data(), header.size());
  uint32_t length = 0;
  MsgType type = wire::check_header(header.data(), length);
  std::vector<uint8_t> payload(length);
  if (length) stream.read_exact(payload.data(), length);
  return decode_payload(type, payload.data(), payload.size());
}

}  // namespace mrv
