// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

// Three-pass symmetric mutual authentication between the reader and the BMS
// device (pre-shared master key K_M):
//
//   M1  reader -> device   nonce_R                                  16 bytes
//   M2  device -> reader   AES-CBC(K_M, IV = 0, nonce_D || nonce_R)  32 bytes
//   M3  reader -> device   AES-CBC(K_M, IV = M2[16..32], nonce_R || nonce_D)
//
// M3 carries the nonces in swapped order and continues the CBC chain from the
// last block of M2, so no block on the wire is a single-block encryption of
// the public nonce_R. Both sides end with seed = nonce_R || nonce_D.

#pragma once

#include <array>
#include <optional>

#include "snfc/bytes.hpp"
#include "snfc/crypto/aes.hpp"
#include "snfc/crypto/modes.hpp"
#include "snfc/crypto/random.hpp"
#include "snfc/crypto/suite.hpp"
#include "snfc/error.hpp"

namespace snfc {

using crypto::MasterKey;
using crypto::Nonce128;
using Serial = std::array<std::uint8_t, 8>;
using Seed = std::array<std::uint8_t, 32>;

struct DeviceIdentity {
  Serial serial{};
  MasterKey master_key;
  Bytes dev_add_data;  // defaults to the serial number

  DeviceIdentity(const Serial& serial_number, const MasterKey& key)
      : serial(serial_number), master_key(key), dev_add_data(serial_number.begin(), serial_number.end()) {}
  DeviceIdentity(const Serial& serial_number, const MasterKey& key, Bytes additional_data)
      : serial(serial_number), master_key(key), dev_add_data(std::move(additional_data)) {}
};

enum class Role { Reader, Device };
enum class AuthPhase { Idle, ChallengeSent, ChallengeReceived, Authenticated, Failed };

inline constexpr std::size_t kChallengeLength = 16;
inline constexpr std::size_t kResponseLength = 32;

class AuthState;

template <crypto::BlockCipher C = crypto::Aes128>
Bytes reader_begin(AuthState& state, crypto::EntropySource& rng);
template <crypto::BlockCipher C = crypto::Aes128>
Bytes device_respond(AuthState& state, const DeviceIdentity& identity, ByteView m1,
                     crypto::EntropySource& rng);
template <crypto::BlockCipher C = crypto::Aes128>
Bytes reader_finish(AuthState& state, const DeviceIdentity& identity, ByteView m2);
template <crypto::BlockCipher C = crypto::Aes128>
Seed device_finish(AuthState& state, const DeviceIdentity& identity, ByteView m3);

class AuthState {
 public:
  explicit AuthState(Role role) : role_(role) {}
  ~AuthState() { wipe(); }
  AuthState(const AuthState&) = default;
  AuthState& operator=(const AuthState&) = default;

  Role role() const noexcept { return role_; }
  AuthPhase phase() const noexcept { return phase_; }
  const Nonce128& own_nonce() const noexcept { return own_nonce_; }
  const std::optional<Nonce128>& peer_nonce() const noexcept { return peer_nonce_; }

  /// nonce_R || nonce_D; only available once Authenticated.
  Seed seed() const {
    if (phase_ != AuthPhase::Authenticated) fail(ErrorCode::InvalidState, "handshake not complete");
    return seed_;
  }

  void reset() noexcept {
    wipe();
    phase_ = AuthPhase::Idle;
  }

 private:
  template <crypto::BlockCipher C>
  friend Bytes reader_begin(AuthState&, crypto::EntropySource&);
  template <crypto::BlockCipher C>
  friend Bytes device_respond(AuthState&, const DeviceIdentity&, ByteView, crypto::EntropySource&);
  template <crypto::BlockCipher C>
  friend Bytes reader_finish(AuthState&, const DeviceIdentity&, ByteView);
  template <crypto::BlockCipher C>
  friend Seed device_finish(AuthState&, const DeviceIdentity&, ByteView);

  void wipe() noexcept {
    secure_zero(own_nonce_.value);
    if (peer_nonce_) secure_zero(peer_nonce_->value);
    peer_nonce_.reset();
    secure_zero(seed_);
    m2_.clear();
  }

  [[noreturn]] void abort(ErrorCode code, const std::string& detail = {}) {
    wipe();
    phase_ = AuthPhase::Failed;
    fail(code, detail);
  }

  void require(Role role, AuthPhase phase) const {
    if (role_ != role || phase_ != phase) fail(ErrorCode::InvalidState, "unexpected handshake step");
  }

  void complete(const Nonce128& reader, const Nonce128& device) {
    std::copy(reader.value.begin(), reader.value.end(), seed_.begin());
    std::copy(device.value.begin(), device.value.end(), seed_.begin() + 16);
    phase_ = AuthPhase::Authenticated;
  }

  Role role_;
  AuthPhase phase_ = AuthPhase::Idle;
  Nonce128 own_nonce_{};
  std::optional<Nonce128> peer_nonce_;
  Bytes m2_;
  Seed seed_{};
};

namespace detail {

inline Bytes two_blocks(const Nonce128& a, const Nonce128& b) { return concat({a.value, b.value}); }

inline Block last_block(ByteView m) { return to_array<16>(m.subspan(m.size() - 16)); }

}  // namespace detail

/// Reader step 1: fresh challenge. Returns M1.
template <crypto::BlockCipher C>
Bytes reader_begin(AuthState& state, crypto::EntropySource& rng) {
  state.require(Role::Reader, AuthPhase::Idle);
  try {
    state.own_nonce_ = crypto::random_nonce(rng);
  } catch (const Error& e) {
    state.abort(e.code());
  }
  state.phase_ = AuthPhase::ChallengeSent;
  return Bytes(state.own_nonce_.value.begin(), state.own_nonce_.value.end());
}

/// Device step: answers M1 with its own challenge and the encrypted pair.
template <crypto::BlockCipher C>
Bytes device_respond(AuthState& state, const DeviceIdentity& identity, ByteView m1,
                     crypto::EntropySource& rng) {
  state.require(Role::Device, AuthPhase::Idle);
  if (m1.size() != kChallengeLength) state.abort(ErrorCode::MalformedMessage, "M1 must be 16 bytes");
  const Nonce128 reader{to_array<16>(m1)};
  if (!crypto::validate_nonce(reader)) state.abort(ErrorCode::InvalidNonce, "reader challenge");
  Nonce128 own{};
  try {
    do {
      own = crypto::random_nonce(rng);
    } while (own == reader);
  } catch (const Error& e) {
    state.abort(e.code());
  }
  C cipher{identity.master_key.bytes()};
  state.own_nonce_ = own;
  state.peer_nonce_ = reader;
  state.m2_ = crypto::cbc_encrypt(cipher, Block{}, detail::two_blocks(own, reader));
  state.phase_ = AuthPhase::ChallengeReceived;
  return state.m2_;
}

/// Reader step 2: verifies M2 and produces M3. On success the state is
/// Authenticated; on any error it is Failed.
template <crypto::BlockCipher C>
Bytes reader_finish(AuthState& state, const DeviceIdentity& identity, ByteView m2) {
  state.require(Role::Reader, AuthPhase::ChallengeSent);
  if (m2.size() != kResponseLength) state.abort(ErrorCode::MalformedMessage, "M2 must be 32 bytes");
  C cipher{identity.master_key.bytes()};
  Bytes plain = crypto::cbc_decrypt(cipher, Block{}, m2);
  const Nonce128 device{to_array<16>(ByteView{plain}.first(16))};
  const Nonce128 echoed{to_array<16>(ByteView{plain}.subspan(16))};
  secure_zero(plain);
  if (!constant_time_equal(echoed.value, state.own_nonce_.value)) {
    state.abort(ErrorCode::ChallengeMismatch, "M2 does not carry the reader challenge");
  }
  if (!crypto::validate_nonce(device) || device == state.own_nonce_) {
    state.abort(ErrorCode::InvalidNonce, "device challenge");
  }
  Bytes m3 = crypto::cbc_encrypt(cipher, detail::last_block(m2),
                                 detail::two_blocks(state.own_nonce_, device));
  if (std::equal(m3.begin(), m3.end(), m2.begin())) state.abort(ErrorCode::ReflectionDetected);
  state.peer_nonce_ = device;
  state.complete(state.own_nonce_, device);
  return m3;
}

/// Device step 2: verifies M3.
template <crypto::BlockCipher C>
Seed device_finish(AuthState& state, const DeviceIdentity& identity, ByteView m3) {
  state.require(Role::Device, AuthPhase::ChallengeReceived);
  if (m3.size() != kResponseLength) state.abort(ErrorCode::MalformedMessage, "M3 must be 32 bytes");
  if (constant_time_equal(m3, state.m2_)) state.abort(ErrorCode::ReflectionDetected);
  C cipher{identity.master_key.bytes()};
  Bytes plain = crypto::cbc_decrypt(cipher, detail::last_block(state.m2_), m3);
  const Bytes expected = detail::two_blocks(*state.peer_nonce_, state.own_nonce_);
  const bool ok = constant_time_equal(plain, expected);
  secure_zero(plain);
  if (!ok) state.abort(ErrorCode::ChallengeMismatch, "M3 does not match the handshake nonces");
  const Nonce128 reader = *state.peer_nonce_;
  state.complete(reader, state.own_nonce_);
  state.m2_.clear();
  return state.seed_;
}

/// Device-side wrapper that serialises handshakes and throttles brute force:
/// after `kLockoutThreshold` consecutive failures new handshakes are refused
/// for `lockout_ms` of simulated time.
class DeviceAuthenticator {
 public:
  static constexpr int kLockoutThreshold = 5;
  static constexpr std::uint64_t kDefaultLockoutMs = 5000;

  explicit DeviceAuthenticator(DeviceIdentity identity, std::uint64_t lockout_ms = kDefaultLockoutMs)
      : identity_(std::move(identity)), lockout_ms_(lockout_ms) {}

  const DeviceIdentity& identity() const noexcept { return identity_; }
  int consecutive_failures() const noexcept { return failures_; }
  bool locked(std::uint64_t now_ms) const noexcept { return now_ms < locked_until_; }
  const AuthState& state() const noexcept { return state_; }

  /// Starts a new handshake, discarding any one in flight.
  Bytes respond(ByteView m1, crypto::EntropySource& rng, std::uint64_t now_ms) {
    if (locked(now_ms)) fail(ErrorCode::LockedOut, "too many failed handshakes");
    state_.reset();
    try {
      return device_respond(state_, identity_, m1, rng);
    } catch (const Error&) {
      record_failure(now_ms);
      throw;
    }
  }

  Seed finish(ByteView m3, std::uint64_t now_ms) {
    if (locked(now_ms)) fail(ErrorCode::LockedOut, "too many failed handshakes");
    try {
      Seed seed = device_finish(state_, identity_, m3);
      failures_ = 0;
      return seed;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidState) record_failure(now_ms);
      throw;
    }
  }

  void abort() noexcept { state_.reset(); }

 private:
  void record_failure(std::uint64_t now_ms) {
    state_.reset();
    if (++failures_ >= kLockoutThreshold) {
      locked_until_ = now_ms + lockout_ms_;
      failures_ = 0;
    }
  }

  DeviceIdentity identity_;
  std::uint64_t lockout_ms_;
  int failures_ = 0;
  std::uint64_t locked_until_ = 0;
  AuthState state_{Role::Device};
};

}  // namespace snfc
