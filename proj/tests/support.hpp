// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <gtest/gtest.h>

#include <functional>
#include <string>
#include <vector>

#include "snfc/snfc.hpp"

namespace snfc::test {

inline Bytes hex(std::string_view s) {
  auto b = from_hex(s);
  if (!b) throw std::invalid_argument("bad hex in test: " + std::string(s));
  return *b;
}

inline Block block_hex(std::string_view s) { return to_array<16>(hex(s)); }

template <typename F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected snfc::Error";
  return ErrorCode::IoError;
}

#define EXPECT_SNFC_ERROR(expr, code) EXPECT_EQ(::snfc::test::error_of([&] { (void)(expr); }), (code))

/// AES-128 wrapper that records every key it is constructed with and counts
/// block operations. Global counters keep it usable through templates that
/// construct the cipher internally.
struct CipherLog {
  std::vector<Block> keys;
  std::size_t encrypts = 0;
  std::size_t decrypts = 0;
  void clear() { *this = CipherLog{}; }
};

inline CipherLog& cipher_log() {
  static CipherLog log;
  return log;
}

class CountingAes {
 public:
  explicit CountingAes(ByteView key) : inner_(key) { cipher_log().keys.push_back(to_array<16>(key)); }
  Block encrypt_block(const Block& in) {
    ++cipher_log().encrypts;
    return inner_.encrypt_block(in);
  }
  Block decrypt_block(const Block& in) {
    ++cipher_log().decrypts;
    return inner_.decrypt_block(in);
  }

 private:
  crypto::Aes128 inner_;
};
static_assert(crypto::BlockCipher<CountingAes>);

/// Entropy source replaying a fixed script of blocks, then failing.
class ScriptedEntropy final : public crypto::EntropySource {
 public:
  explicit ScriptedEntropy(std::vector<Block> blocks) : blocks_(std::move(blocks)) {}
  void fill(std::span<std::uint8_t> out) override {
    if (next_ >= blocks_.size()) fail(ErrorCode::EntropyUnavailable, "script exhausted");
    std::copy_n(blocks_[next_].begin(), std::min<std::size_t>(16, out.size()), out.begin());
    ++next_;
  }
  std::size_t used() const noexcept { return next_; }

 private:
  std::vector<Block> blocks_;
  std::size_t next_ = 0;
};

inline DeviceIdentity default_identity() { return Fixture{}.identity(); }

/// Runs the four handshake messages between two fresh states.
struct Handshake {
  AuthState reader{Role::Reader};
  AuthState device{Role::Device};
  Bytes m1, m2, m3;
  Seed reader_seed{}, device_seed{};

  Handshake(const DeviceIdentity& id, crypto::EntropySource& rng) : Handshake(id, id, rng) {}
  Handshake(const DeviceIdentity& reader_id, const DeviceIdentity& device_id,
            crypto::EntropySource& rng) {
    m1 = reader_begin(reader, rng);
    m2 = device_respond(device, device_id, m1, rng);
    m3 = reader_finish(reader, reader_id, m2);
    device_seed = device_finish(device, device_id, m3);
    reader_seed = reader.seed();
  }
};

}  // namespace snfc::test
