// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

// Session key material, the session KDF, and the per-suite seal/unseal used
// by SNDEF records. Every suite authenticates suite_byte || iv together with
// the ciphertext; for AES-CBC + CMAC the tag is computed over the ciphertext
// (Encrypt-then-MAC) and verified before anything is decrypted.

#pragma once

#include <optional>

#include "snfc/bytes.hpp"
#include "snfc/codec.hpp"
#include "snfc/crypto/aes.hpp"
#include "snfc/crypto/hmac.hpp"
#include "snfc/crypto/modes.hpp"
#include "snfc/crypto/random.hpp"
#include "snfc/error.hpp"

namespace snfc::crypto {

/// Long-term pre-shared key. Deliberately has no stream operator.
class MasterKey {
 public:
  explicit MasterKey(ByteView key) {
    if (key.size() != 16) fail(ErrorCode::InvalidKeyMaterial, "master key must be 16 bytes");
    std::copy(key.begin(), key.end(), key_.begin());
  }
  MasterKey(const MasterKey&) = default;
  MasterKey& operator=(const MasterKey&) = default;
  ~MasterKey() { secure_zero(key_); }

  ByteView bytes() const noexcept { return key_; }
  bool operator==(const MasterKey& other) const noexcept {
    return constant_time_equal(key_, other.key_);
  }

 private:
  Block key_{};
};

struct SessionKeys {
  Block enc_key{};
  std::optional<Block> mac_key;  // AES-CBC + CMAC only

  void wipe() noexcept {
    secure_zero(enc_key);
    if (mac_key) secure_zero(*mac_key);
    mac_key.reset();
  }
  bool operator==(const SessionKeys&) const = default;
};

inline constexpr std::size_t kKdfBlock = 64;

/// dev_add_data || nonce_reader || nonce_device, then 0x80 and zeros up to the
/// next multiple of 64 bytes.
inline Bytes kdf_message(ByteView dev_add_data, const Nonce128& nonce_reader,
                         const Nonce128& nonce_device) {
  Bytes msg = concat({dev_add_data, nonce_reader.value, nonce_device.value});
  msg.push_back(0x80);
  while (msg.size() % kKdfBlock != 0) msg.push_back(0x00);
  return msg;
}

/// K_d = HMAC-SHA256(K_M, kdf_message(...)). The HMAC path shares no block
/// cipher invocation with the AES-based handshake.
inline SessionKeys derive_session_keys(const MasterKey& master, ByteView dev_add_data,
                                       const Nonce128& nonce_reader,
                                       const Nonce128& nonce_device, CipherSuite suite) {
  if (!validate_nonce(nonce_reader) || !validate_nonce(nonce_device) ||
      nonce_reader == nonce_device) {
    fail(ErrorCode::InvalidNonce, "KDF seed nonces rejected");
  }
  Bytes msg = kdf_message(dev_add_data, nonce_reader, nonce_device);
  Digest256 kd = hmac_sha256(master.bytes(), msg);
  secure_zero(msg);

  SessionKeys keys;
  std::copy_n(kd.begin(), 16, keys.enc_key.begin());
  if (!is_aead(suite)) {
    Block mac{};
    std::copy_n(kd.begin() + 16, 16, mac.begin());
    keys.mac_key = mac;
    secure_zero(mac);
    if (constant_time_equal(keys.enc_key, *keys.mac_key)) {
      secure_zero(kd);
      fail(ErrorCode::DegenerateKeys);
    }
  }
  secure_zero(kd);
  return keys;
}

namespace detail {

inline Bytes header_aad(std::uint8_t suite_byte, const Block& iv) {
  Bytes aad;
  aad.reserve(17);
  aad.push_back(suite_byte);
  append(aad, iv);
  return aad;
}

}  // namespace detail

/// Encrypts one encoded plaintext. CBC pads with PKCS#7; AEAD suites take
/// their nonce from the leading 12 (GCM), 13 (CCM) or 16 (EAX) IV bytes.
template <BlockCipher Cipher = Aes128>
Sealed seal(CipherSuite suite, const SessionKeys& keys, const Block& iv, ByteView plaintext) {
  const auto suite_byte = static_cast<std::uint8_t>(suite);
  const Bytes aad = detail::header_aad(suite_byte, iv);
  const ByteView nonce{iv};
  Cipher cipher{ByteView{keys.enc_key}};
  switch (suite) {
    case CipherSuite::CbcCmac: {
      if (!keys.mac_key) fail(ErrorCode::InvalidKeyMaterial, "CBC suite needs a MAC key");
      Sealed s;
      s.ciphertext = cbc_encrypt(cipher, iv, pkcs7_pad(plaintext));
      Cipher mac{ByteView{*keys.mac_key}};
      s.tag = cmac(mac, concat({aad, s.ciphertext}));
      return s;
    }
    case CipherSuite::Gcm:
      return gcm_seal(cipher, nonce.first(12), aad, plaintext);
    case CipherSuite::Ccm:
      return ccm_seal(cipher, nonce.first(13), aad, plaintext);
    case CipherSuite::Eax:
      return eax_seal(cipher, nonce, aad, plaintext);
  }
  fail(ErrorCode::InvalidKeyMaterial, "unknown suite");
}

/// Verifies and decrypts. `algorithm` selects the cipher and key layout;
/// `wire_suite_byte` is the suite byte as received, which is part of the
/// authenticated header. A record relabelled to another suite therefore fails
/// with TagMismatch.
template <BlockCipher Cipher = Aes128>
Bytes unseal(CipherSuite algorithm, std::uint8_t wire_suite_byte, const SessionKeys& keys,
             const Block& iv, ByteView ciphertext, const Block& tag) {
  const Bytes aad = detail::header_aad(wire_suite_byte, iv);
  const ByteView nonce{iv};
  switch (algorithm) {
    case CipherSuite::CbcCmac: {
      if (!keys.mac_key) fail(ErrorCode::InvalidKeyMaterial, "CBC suite needs a MAC key");
      if (ciphertext.empty() || ciphertext.size() % kBlockSize != 0) {
        fail(ErrorCode::InvalidLength, "CBC ciphertext not block aligned");
      }
      {
        Cipher mac{ByteView{*keys.mac_key}};
        const Block expected = cmac(mac, concat({aad, ciphertext}));
        if (!constant_time_equal(expected, tag)) fail(ErrorCode::TagMismatch);
      }
      Cipher cipher{ByteView{keys.enc_key}};
      Bytes padded = cbc_decrypt(cipher, iv, ciphertext);
      Bytes plain = pkcs7_unpad(padded);
      secure_zero(padded);
      return plain;
    }
    case CipherSuite::Gcm: {
      Cipher cipher{ByteView{keys.enc_key}};
      return gcm_open(cipher, nonce.first(12), aad, ciphertext, tag);
    }
    case CipherSuite::Ccm: {
      Cipher cipher{ByteView{keys.enc_key}};
      return ccm_open(cipher, nonce.first(13), aad, ciphertext, tag);
    }
    case CipherSuite::Eax: {
      Cipher cipher{ByteView{keys.enc_key}};
      return eax_open(cipher, nonce, aad, ciphertext, tag);
    }
  }
  fail(ErrorCode::InvalidKeyMaterial, "unknown suite");
}

template <BlockCipher Cipher = Aes128>
Bytes unseal(CipherSuite suite, const SessionKeys& keys, const Block& iv, ByteView ciphertext,
             const Block& tag) {
  return unseal<Cipher>(suite, static_cast<std::uint8_t>(suite), keys, iv, ciphertext, tag);
}

}  // namespace snfc::crypto
