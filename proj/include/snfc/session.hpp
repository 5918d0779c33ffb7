// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>

#include "snfc/auth.hpp"
#include "snfc/codec.hpp"
#include "snfc/crypto/random.hpp"
#include "snfc/crypto/suite.hpp"
#include "snfc/error.hpp"

namespace snfc {

enum class SessionMode : std::uint8_t { ReadOnly = 0x00, ReadWrite = 0x01 };

constexpr std::string_view session_mode_name(SessionMode m) noexcept {
  return m == SessionMode::ReadOnly ? "read-only" : "read-write";
}

/// One endpoint's view of the secure channel. Counters are per direction:
/// send_counter numbers outgoing records from 1, recv_high_water is the
/// largest inbound counter accepted so far (strictly-greater replay rule).
class Session {
 public:
  static constexpr std::uint32_t kMaxCounter = std::numeric_limits<std::uint32_t>::max();

  /// `initial_send_counter` is the value before the first seal; 0 for a new
  /// session.
  static Session open(const Seed& seed, const DeviceIdentity& identity, CipherSuite suite,
                      SessionMode mode, std::uint32_t initial_send_counter = 0) {
    const Nonce128 reader{to_array<16>(ByteView{seed}.first(16))};
    const Nonce128 device{to_array<16>(ByteView{seed}.subspan(16))};
    try {
      return Session(crypto::derive_session_keys(identity.master_key, identity.dev_add_data,
                                                 reader, device, suite),
                     suite, mode, initial_send_counter);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidNonce) fail(ErrorCode::InvalidSeed, e.what());
      throw;
    }
  }

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;
  Session(Session&& other) noexcept
      : keys_(other.keys_), suite_(other.suite_), mode_(other.mode_),
        send_counter_(other.send_counter_), recv_high_water_(other.recv_high_water_),
        next_message_id_(other.next_message_id_), open_(other.open_) {
    other.close();
  }
  Session& operator=(Session&& other) noexcept {
    if (this != &other) {
      close();
      keys_ = other.keys_;
      suite_ = other.suite_;
      mode_ = other.mode_;
      send_counter_ = other.send_counter_;
      recv_high_water_ = other.recv_high_water_;
      next_message_id_ = other.next_message_id_;
      open_ = other.open_;
      other.close();
    }
    return *this;
  }
  ~Session() { close(); }

  CipherSuite suite() const noexcept { return suite_; }
  SessionMode mode() const noexcept { return mode_; }
  bool is_open() const noexcept { return open_; }
  std::uint32_t send_counter() const noexcept { return send_counter_; }
  std::uint32_t recv_high_water() const noexcept { return recv_high_water_; }
  const crypto::SessionKeys& keys() const noexcept { return keys_; }

  /// Seals the next outgoing message. `sealed` optionally receives the
  /// plaintext that went into the record.
  SndefRecord seal_message(MessageType type, ByteView data, crypto::EntropySource& rng,
                           PlainMessage* sealed = nullptr) {
    if (!open_) fail(ErrorCode::SessionClosed);
    if (type == MessageType::UpdateConfig && mode_ != SessionMode::ReadWrite) {
      fail(ErrorCode::WriteNotPermitted, "session was opened read-only");
    }
    if (data.size() > kMaxDataLength) {
      fail(ErrorCode::DataTooLong, std::to_string(data.size()) + " data bytes");
    }
    if (send_counter_ == kMaxCounter) fail(ErrorCode::CounterExhausted, "re-key required");

    PlainMessage msg;
    msg.message_id = next_message_id_;
    msg.type = type;
    msg.counter = send_counter_ + 1;
    msg.data.assign(data.begin(), data.end());
    Bytes plain = encode_plain(msg);

    SndefRecord rec;
    rec.suite = suite_;
    rec.iv = rng.block();
    auto out = crypto::seal(suite_, keys_, rec.iv, plain);
    secure_zero(plain);
    rec.secret_payload = std::move(out.ciphertext);
    rec.tag = out.tag;

    ++send_counter_;
    ++next_message_id_;
    if (sealed) *sealed = std::move(msg);
    return rec;
  }

  PlainMessage open_message(const SndefRecord& rec) {
    if (!open_) fail(ErrorCode::SessionClosed);
    Bytes plain = crypto::unseal(suite_, static_cast<std::uint8_t>(rec.suite), keys_, rec.iv,
                                 rec.secret_payload, rec.tag);
    PlainMessage msg;
    try {
      msg = decode_plain(plain);
    } catch (...) {
      secure_zero(plain);
      throw;
    }
    secure_zero(plain);
    if (msg.counter <= recv_high_water_) {
      fail(ErrorCode::ReplayDetected, "counter " + std::to_string(msg.counter) +
                                          " <= high water " + std::to_string(recv_high_water_));
    }
    if (rec.suite != suite_) fail(ErrorCode::SuiteMismatch);
    recv_high_water_ = msg.counter;
    return msg;
  }

  /// Idempotent; wipes key material.
  void close() noexcept {
    keys_.wipe();
    send_counter_ = 0;
    recv_high_water_ = 0;
    open_ = false;
  }

 private:
  Session(crypto::SessionKeys keys, CipherSuite suite, SessionMode mode, std::uint32_t send)
      : keys_(keys), suite_(suite), mode_(mode), send_counter_(send) {
    keys.wipe();
  }

  crypto::SessionKeys keys_;
  CipherSuite suite_;
  SessionMode mode_;
  std::uint32_t send_counter_ = 0;
  std::uint32_t recv_high_water_ = 0;
  std::uint32_t next_message_id_ = 1;
  bool open_ = true;
};

}  // namespace snfc
