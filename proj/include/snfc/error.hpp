// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace snfc {

enum class ErrorCode {
  // record / payload codec
  InvalidRecord,
  TruncatedRecord,
  UnknownSuite,
  LengthMismatch,
  DataTooLong,
  TruncatedPayload,
  UnknownMessageType,
  ZeroCounter,
  // crypto
  EntropyUnavailable,
  InvalidNonce,
  DegenerateKeys,
  InvalidKeyMaterial,
  TagMismatch,
  PaddingInvalid,
  InvalidLength,
  // authentication
  MalformedMessage,
  ChallengeMismatch,
  ReflectionDetected,
  LockedOut,
  InvalidState,
  // session
  InvalidSeed,
  SessionClosed,
  WriteNotPermitted,
  CounterExhausted,
  ReplayDetected,
  SuiteMismatch,
  // device model
  DeviceUnpowered,
  ValueTooLong,
  UnknownConfigKey,
  IndexOutOfRange,
  ValueOutOfRange,
  // transport
  FrameTooLarge,
  EndpointUnpowered,
  LivelockDetected,
  // fixtures / io
  FixtureError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::TruncatedRecord: return "TruncatedRecord";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DataTooLong: return "DataTooLong";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::UnknownMessageType: return "UnknownMessageType";
    case ErrorCode::ZeroCounter: return "ZeroCounter";
    case ErrorCode::EntropyUnavailable: return "EntropyUnavailable";
    case ErrorCode::InvalidNonce: return "InvalidNonce";
    case ErrorCode::DegenerateKeys: return "DegenerateKeys";
    case ErrorCode::InvalidKeyMaterial: return "InvalidKeyMaterial";
    case ErrorCode::TagMismatch: return "TagMismatch";
    case ErrorCode::PaddingInvalid: return "PaddingInvalid";
    case ErrorCode::InvalidLength: return "InvalidLength";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
    case ErrorCode::ChallengeMismatch: return "ChallengeMismatch";
    case ErrorCode::ReflectionDetected: return "ReflectionDetected";
    case ErrorCode::LockedOut: return "LockedOut";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::InvalidSeed: return "InvalidSeed";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::WriteNotPermitted: return "WriteNotPermitted";
    case ErrorCode::CounterExhausted: return "CounterExhausted";
    case ErrorCode::ReplayDetected: return "ReplayDetected";
    case ErrorCode::SuiteMismatch: return "SuiteMismatch";
    case ErrorCode::DeviceUnpowered: return "DeviceUnpowered";
    case ErrorCode::ValueTooLong: return "ValueTooLong";
    case ErrorCode::UnknownConfigKey: return "UnknownConfigKey";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ValueOutOfRange: return "ValueOutOfRange";
    case ErrorCode::FrameTooLarge: return "FrameTooLarge";
    case ErrorCode::EndpointUnpowered: return "EndpointUnpowered";
    case ErrorCode::LivelockDetected: return "LivelockDetected";
    case ErrorCode::FixtureError: return "FixtureError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Exception type for every failure raised by the library. Callers switch on
/// code(); what() carries a human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}
  explicit Error(ErrorCode code)
      : std::runtime_error(std::string(to_string(code))), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail = {}) {
  if (detail.empty()) throw Error(code);
  throw Error(code, detail);
}

}  // namespace snfc
