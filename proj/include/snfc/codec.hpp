// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

// SNDEF wire format.
//
// Record layout (all integers big-endian):
//
//   [suite:1][iv:16][payload_len:2][secret_payload:N][tag:16]
//
// Plaintext carried inside secret_payload before encryption:
//
//   [message_id:4][message_type:1][counter:4][data_len:2][data:0..182]
//
// On the NFC link a record travels inside a single short NDEF record of
// external type "sndef".

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "snfc/bytes.hpp"
#include "snfc/error.hpp"

namespace snfc {

enum class CipherSuite : std::uint8_t {
  CbcCmac = 0x01,
  Gcm = 0x02,
  Ccm = 0x03,
  Eax = 0x04,
};

inline constexpr CipherSuite kAllSuites[] = {CipherSuite::CbcCmac, CipherSuite::Gcm,
                                             CipherSuite::Ccm, CipherSuite::Eax};

constexpr bool is_known_suite(std::uint8_t code) noexcept {
  return code >= 0x01 && code <= 0x04;
}

constexpr bool is_aead(CipherSuite s) noexcept { return s != CipherSuite::CbcCmac; }

/// Command-line spelling of a suite.
constexpr std::string_view suite_name(CipherSuite s) noexcept {
  switch (s) {
    case CipherSuite::CbcCmac: return "cbc-cmac";
    case CipherSuite::Gcm: return "gcm";
    case CipherSuite::Ccm: return "ccm";
    case CipherSuite::Eax: return "eax";
  }
  return "unknown";
}

inline std::optional<CipherSuite> parse_suite(std::string_view name) {
  for (auto s : kAllSuites) {
    if (suite_name(s) == name) return s;
  }
  return std::nullopt;
}

enum class MessageType : std::uint8_t {
  ReadStatus = 0x01,
  StatusData = 0x02,
  UpdateConfig = 0x03,
  Ack = 0x04,
  Error = 0x05,
};

constexpr bool is_known_message_type(std::uint8_t code) noexcept {
  return code >= 0x01 && code <= 0x05;
}

constexpr std::string_view message_type_name(MessageType t) noexcept {
  switch (t) {
    case MessageType::ReadStatus: return "READ_STATUS";
    case MessageType::StatusData: return "STATUS_DATA";
    case MessageType::UpdateConfig: return "UPDATE_CONFIG";
    case MessageType::Ack: return "ACK";
    case MessageType::Error: return "ERROR";
  }
  return "UNKNOWN";
}

inline constexpr std::size_t kMaxDataLength = 182;
inline constexpr std::size_t kPlainHeaderLength = 11;
inline constexpr std::size_t kMaxPlainLength = kPlainHeaderLength + kMaxDataLength;  // 193
inline constexpr std::size_t kMaxCbcPayload = 208;  // 193 padded to a block multiple
inline constexpr std::size_t kRecordOverhead = 1 + 16 + 2 + 16;
inline constexpr std::size_t kMailboxCapacity = 256;

inline constexpr std::uint8_t kNdefHeader = 0xD4;  // MB | ME | SR | TNF=external
inline constexpr std::string_view kNdefType = "sndef";
inline constexpr std::size_t kNdefEnvelopeLength = 3 + kNdefType.size();

struct SndefRecord {
  CipherSuite suite = CipherSuite::CbcCmac;
  Block iv{};
  Bytes secret_payload;
  Block tag{};

  bool operator==(const SndefRecord&) const = default;
};

struct PlainMessage {
  std::uint32_t message_id = 0;
  MessageType type = MessageType::ReadStatus;
  std::uint32_t counter = 1;
  Bytes data;

  bool operator==(const PlainMessage&) const = default;
};

/// Whether a ciphertext of `length` bytes can be produced by `suite` from a
/// plaintext of 11..193 bytes.
constexpr bool valid_payload_length(CipherSuite suite, std::size_t length) noexcept {
  if (suite == CipherSuite::CbcCmac) {
    return length >= kBlockSize && length <= kMaxCbcPayload && length % kBlockSize == 0;
  }
  return length >= kPlainHeaderLength && length <= kMaxPlainLength;
}

inline Bytes encode_record(const SndefRecord& rec) {
  if (!is_known_suite(static_cast<std::uint8_t>(rec.suite))) {
    fail(ErrorCode::InvalidRecord, "unknown cipher suite");
  }
  if (!valid_payload_length(rec.suite, rec.secret_payload.size())) {
    fail(ErrorCode::InvalidRecord,
         "secret payload of " + std::to_string(rec.secret_payload.size()) +
             " bytes is not valid for suite " + std::string(suite_name(rec.suite)));
  }
  Bytes out;
  out.reserve(kRecordOverhead + rec.secret_payload.size());
  out.push_back(static_cast<std::uint8_t>(rec.suite));
  append(out, rec.iv);
  put_be16(out, static_cast<std::uint16_t>(rec.secret_payload.size()));
  append(out, rec.secret_payload);
  append(out, rec.tag);
  return out;
}

inline SndefRecord decode_record(ByteView in) {
  if (in.empty()) fail(ErrorCode::TruncatedRecord, "empty record");
  if (!is_known_suite(in[0])) fail(ErrorCode::UnknownSuite);
  if (in.size() < 19) fail(ErrorCode::TruncatedRecord);
  const std::size_t len = get_be16(in, 17);
  if (in.size() != 19 + len + kBlockSize) {
    if (in.size() < 19 + kBlockSize) fail(ErrorCode::TruncatedRecord);
    fail(ErrorCode::LengthMismatch, "payload_len " + std::to_string(len) +
                                        " vs record of " + std::to_string(in.size()) +
                                        " bytes");
  }
  SndefRecord rec;
  rec.suite = static_cast<CipherSuite>(in[0]);
  if (!valid_payload_length(rec.suite, len)) {
    fail(ErrorCode::InvalidRecord, "payload length not valid for suite");
  }
  std::copy_n(in.begin() + 1, 16, rec.iv.begin());
  rec.secret_payload.assign(in.begin() + 19, in.begin() + 19 + static_cast<long>(len));
  std::copy_n(in.begin() + 19 + static_cast<long>(len), 16, rec.tag.begin());
  return rec;
}

/// Wraps an encoded record in a single short NDEF record.
inline Bytes wrap_ndef(ByteView record) {
  if (record.size() > 255) fail(ErrorCode::InvalidRecord, "too long for a short NDEF record");
  Bytes out;
  out.reserve(kNdefEnvelopeLength + record.size());
  out.push_back(kNdefHeader);
  out.push_back(static_cast<std::uint8_t>(kNdefType.size()));
  out.push_back(static_cast<std::uint8_t>(record.size()));
  out.insert(out.end(), kNdefType.begin(), kNdefType.end());
  append(out, record);
  return out;
}

inline Bytes unwrap_ndef(ByteView message) {
  if (message.size() < kNdefEnvelopeLength) fail(ErrorCode::TruncatedRecord, "NDEF header");
  if (message[0] != kNdefHeader || message[1] != kNdefType.size() ||
      !std::equal(kNdefType.begin(), kNdefType.end(), message.begin() + 3)) {
    fail(ErrorCode::InvalidRecord, "not an sndef NDEF record");
  }
  if (message.size() != kNdefEnvelopeLength + message[2]) {
    fail(ErrorCode::LengthMismatch, "NDEF payload length");
  }
  return Bytes(message.begin() + kNdefEnvelopeLength, message.end());
}

inline Bytes encode_plain(const PlainMessage& msg) {
  if (msg.data.size() > kMaxDataLength) {
    fail(ErrorCode::DataTooLong, std::to_string(msg.data.size()) + " data bytes");
  }
  if (!is_known_message_type(static_cast<std::uint8_t>(msg.type))) {
    fail(ErrorCode::UnknownMessageType);
  }
  if (msg.counter == 0) fail(ErrorCode::ZeroCounter);
  Bytes out;
  out.reserve(kPlainHeaderLength + msg.data.size());
  put_be32(out, msg.message_id);
  out.push_back(static_cast<std::uint8_t>(msg.type));
  put_be32(out, msg.counter);
  put_be16(out, static_cast<std::uint16_t>(msg.data.size()));
  append(out, msg.data);
  return out;
}

inline PlainMessage decode_plain(ByteView in) {
  if (in.size() < kPlainHeaderLength) fail(ErrorCode::TruncatedPayload);
  const std::size_t len = get_be16(in, 9);
  if (in.size() != kPlainHeaderLength + len) fail(ErrorCode::LengthMismatch, "data_len");
  if (len > kMaxDataLength) fail(ErrorCode::DataTooLong);
  if (!is_known_message_type(in[4])) fail(ErrorCode::UnknownMessageType);
  PlainMessage msg;
  msg.message_id = get_be32(in, 0);
  msg.type = static_cast<MessageType>(in[4]);
  msg.counter = get_be32(in, 5);
  if (msg.counter == 0) fail(ErrorCode::ZeroCounter);
  msg.data.assign(in.begin() + kPlainHeaderLength, in.end());
  return msg;
}

}  // namespace snfc
