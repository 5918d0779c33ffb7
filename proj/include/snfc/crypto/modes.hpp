// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

// Block cipher modes used by the SNDEF cipher suites: CBC with PKCS#7, CMAC
// (RFC 4493), CTR, and the AEADs GCM (96-bit nonce), CCM (13-byte nonce,
// 16-byte tag) and EAX. All AEAD open routines verify the tag before any
// plaintext is returned.

#pragma once

#include <cstdint>

#include "snfc/bytes.hpp"
#include "snfc/crypto/aes.hpp"
#include "snfc/error.hpp"

namespace snfc::crypto {

struct Sealed {
  Bytes ciphertext;
  Block tag{};
};

namespace detail {

inline void xor_into(Block& dst, ByteView src) noexcept {
  for (std::size_t i = 0; i < src.size() && i < dst.size(); ++i) dst[i] ^= src[i];
}

inline Block shift_left_one(const Block& in) noexcept {
  Block out{};
  for (std::size_t i = 0; i < 16; ++i) {
    out[i] = static_cast<std::uint8_t>(in[i] << 1);
    if (i + 1 < 16) out[i] |= in[i + 1] >> 7;
  }
  return out;
}

inline void increment_be(Block& counter, std::size_t from = 0) noexcept {
  for (std::size_t i = 16; i-- > from;) {
    if (++counter[i] != 0) break;
  }
}

}  // namespace detail

inline Bytes pkcs7_pad(ByteView data) {
  const std::size_t pad = kBlockSize - data.size() % kBlockSize;
  Bytes out(data.begin(), data.end());
  out.insert(out.end(), pad, static_cast<std::uint8_t>(pad));
  return out;
}

inline Bytes pkcs7_unpad(ByteView data) {
  if (data.empty() || data.size() % kBlockSize != 0) fail(ErrorCode::PaddingInvalid);
  const std::uint8_t pad = data.back();
  if (pad == 0 || pad > kBlockSize) fail(ErrorCode::PaddingInvalid);
  for (std::size_t i = data.size() - pad; i < data.size(); ++i) {
    if (data[i] != pad) fail(ErrorCode::PaddingInvalid);
  }
  return Bytes(data.begin(), data.end() - pad);
}

template <BlockCipher C>
Bytes cbc_encrypt(C& cipher, const Block& iv, ByteView data) {
  if (data.size() % kBlockSize != 0) fail(ErrorCode::InvalidLength, "CBC input not block aligned");
  Bytes out(data.size());
  Block chain = iv;
  for (std::size_t off = 0; off < data.size(); off += kBlockSize) {
    detail::xor_into(chain, data.subspan(off, kBlockSize));
    chain = cipher.encrypt_block(chain);
    std::copy(chain.begin(), chain.end(), out.begin() + static_cast<long>(off));
  }
  return out;
}

template <BlockCipher C>
Bytes cbc_decrypt(C& cipher, const Block& iv, ByteView data) {
  if (data.size() % kBlockSize != 0) fail(ErrorCode::InvalidLength, "CBC input not block aligned");
  Bytes out(data.size());
  Block chain = iv;
  for (std::size_t off = 0; off < data.size(); off += kBlockSize) {
    const Block in = to_array<16>(data.subspan(off, kBlockSize));
    Block plain = cipher.decrypt_block(in);
    detail::xor_into(plain, chain);
    std::copy(plain.begin(), plain.end(), out.begin() + static_cast<long>(off));
    chain = in;
  }
  return out;
}

template <BlockCipher C>
Block cmac(C& cipher, ByteView message) {
  const Block l = cipher.encrypt_block(Block{});
  auto subkey = [](const Block& in) {
    Block out = detail::shift_left_one(in);
    if (in[0] & 0x80) out[15] ^= 0x87;
    return out;
  };
  const Block k1 = subkey(l);
  const Block k2 = subkey(k1);

  const std::size_t n = message.empty() ? 1 : (message.size() + 15) / 16;
  const bool complete = !message.empty() && message.size() % 16 == 0;

  Block x{};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    detail::xor_into(x, message.subspan(i * 16, 16));
    x = cipher.encrypt_block(x);
  }
  Block last{};
  const std::size_t tail = message.size() - (n - 1) * 16;
  std::copy_n(message.begin() + static_cast<long>((n - 1) * 16), tail, last.begin());
  if (complete) {
    detail::xor_into(last, k1);
  } else {
    last[tail] = 0x80;
    detail::xor_into(last, k2);
  }
  detail::xor_into(x, last);
  return cipher.encrypt_block(x);
}

/// CTR keystream XOR. `counter_from` is the first byte of the counter field
/// that increments (12 for GCM's inc32, 0 for a full 128-bit counter).
template <BlockCipher C>
Bytes ctr_xor(C& cipher, Block counter, ByteView data, std::size_t counter_from = 0) {
  Bytes out(data.begin(), data.end());
  for (std::size_t off = 0; off < out.size(); off += kBlockSize) {
    const Block ks = cipher.encrypt_block(counter);
    const std::size_t n = std::min(kBlockSize, out.size() - off);
    for (std::size_t i = 0; i < n; ++i) out[off + i] ^= ks[i];
    detail::increment_be(counter, counter_from);
  }
  return out;
}

// ---------------------------------------------------------------------------
// GCM

namespace detail {

/// Multiplication in GF(2^128) with the GCM bit order.
inline Block gf128_mul(const Block& x, const Block& y) noexcept {
  std::uint64_t zh = 0, zl = 0;
  std::uint64_t vh = get_be32(y, 0);
  vh = (vh << 32) | get_be32(y, 4);
  std::uint64_t vl = get_be32(y, 8);
  vl = (vl << 32) | get_be32(y, 12);
  for (int i = 0; i < 128; ++i) {
    if ((x[static_cast<std::size_t>(i / 8)] >> (7 - i % 8)) & 1) {
      zh ^= vh;
      zl ^= vl;
    }
    const bool lsb = vl & 1;
    vl = (vl >> 1) | (vh << 63);
    vh >>= 1;
    if (lsb) vh ^= 0xE100000000000000ULL;
  }
  Block out{};
  for (int i = 0; i < 8; ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(zh >> (56 - 8 * i));
    out[static_cast<std::size_t>(8 + i)] = static_cast<std::uint8_t>(zl >> (56 - 8 * i));
  }
  return out;
}

inline Block ghash(const Block& h, ByteView aad, ByteView ciphertext) noexcept {
  Block y{};
  auto absorb = [&](ByteView data) {
    for (std::size_t off = 0; off < data.size(); off += 16) {
      xor_into(y, data.subspan(off, std::min<std::size_t>(16, data.size() - off)));
      y = gf128_mul(y, h);
    }
  };
  absorb(aad);
  absorb(ciphertext);
  Block lengths{};
  const std::uint64_t abits = aad.size() * 8, cbits = ciphertext.size() * 8;
  for (int i = 0; i < 8; ++i) {
    lengths[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(abits >> (56 - 8 * i));
    lengths[static_cast<std::size_t>(8 + i)] = static_cast<std::uint8_t>(cbits >> (56 - 8 * i));
  }
  xor_into(y, lengths);
  return gf128_mul(y, h);
}

template <BlockCipher C>
Block gcm_tag(C& cipher, const Block& j0, ByteView aad, ByteView ciphertext) {
  const Block h = cipher.encrypt_block(Block{});
  Block tag = ghash(h, aad, ciphertext);
  xor_into(tag, cipher.encrypt_block(j0));
  return tag;
}

inline Block gcm_j0(ByteView nonce12) {
  if (nonce12.size() != 12) fail(ErrorCode::InvalidLength, "GCM nonce must be 12 bytes");
  Block j0{};
  std::copy(nonce12.begin(), nonce12.end(), j0.begin());
  j0[15] = 1;
  return j0;
}

}  // namespace detail

template <BlockCipher C>
Sealed gcm_seal(C& cipher, ByteView nonce12, ByteView aad, ByteView plaintext) {
  const Block j0 = detail::gcm_j0(nonce12);
  Block ctr = j0;
  detail::increment_be(ctr, 12);
  Sealed s;
  s.ciphertext = ctr_xor(cipher, ctr, plaintext, 12);
  s.tag = detail::gcm_tag(cipher, j0, aad, s.ciphertext);
  return s;
}

template <BlockCipher C>
Bytes gcm_open(C& cipher, ByteView nonce12, ByteView aad, ByteView ciphertext,
               const Block& tag) {
  const Block j0 = detail::gcm_j0(nonce12);
  const Block expected = detail::gcm_tag(cipher, j0, aad, ciphertext);
  if (!constant_time_equal(expected, tag)) fail(ErrorCode::TagMismatch);
  Block ctr = j0;
  detail::increment_be(ctr, 12);
  return ctr_xor(cipher, ctr, ciphertext, 12);
}

// ---------------------------------------------------------------------------
// CCM, fixed profile: 13-byte nonce (L = 2), 16-byte tag.

namespace detail {

inline constexpr std::size_t kCcmNonce = 13;

template <BlockCipher C>
Block ccm_cbc_mac(C& cipher, ByteView nonce, ByteView aad, ByteView plaintext) {
  if (plaintext.size() > 0xFFFF) fail(ErrorCode::InvalidLength, "CCM payload too long");
  if (aad.size() >= 0xFF00) fail(ErrorCode::InvalidLength, "CCM AAD too long");
  Block b0{};
  b0[0] = static_cast<std::uint8_t>((aad.empty() ? 0 : 0x40) | (((16 - 2) / 2) << 3) | (2 - 1));
  std::copy(nonce.begin(), nonce.end(), b0.begin() + 1);
  b0[14] = static_cast<std::uint8_t>(plaintext.size() >> 8);
  b0[15] = static_cast<std::uint8_t>(plaintext.size());
  Block x = cipher.encrypt_block(b0);

  auto absorb = [&](ByteView data) {
    for (std::size_t off = 0; off < data.size(); off += 16) {
      xor_into(x, data.subspan(off, std::min<std::size_t>(16, data.size() - off)));
      x = cipher.encrypt_block(x);
    }
  };
  if (!aad.empty()) {
    Bytes encoded;
    put_be16(encoded, static_cast<std::uint16_t>(aad.size()));
    append(encoded, aad);
    absorb(encoded);
  }
  absorb(plaintext);
  return x;
}

inline Block ccm_counter(ByteView nonce, std::uint16_t index) {
  Block a{};
  a[0] = 2 - 1;
  std::copy(nonce.begin(), nonce.end(), a.begin() + 1);
  a[14] = static_cast<std::uint8_t>(index >> 8);
  a[15] = static_cast<std::uint8_t>(index);
  return a;
}

}  // namespace detail

template <BlockCipher C>
Sealed ccm_seal(C& cipher, ByteView nonce13, ByteView aad, ByteView plaintext) {
  if (nonce13.size() != detail::kCcmNonce) fail(ErrorCode::InvalidLength, "CCM nonce must be 13 bytes");
  Sealed s;
  s.tag = detail::ccm_cbc_mac(cipher, nonce13, aad, plaintext);
  detail::xor_into(s.tag, cipher.encrypt_block(detail::ccm_counter(nonce13, 0)));
  s.ciphertext = ctr_xor(cipher, detail::ccm_counter(nonce13, 1), plaintext, 14);
  return s;
}

template <BlockCipher C>
Bytes ccm_open(C& cipher, ByteView nonce13, ByteView aad, ByteView ciphertext,
               const Block& tag) {
  if (nonce13.size() != detail::kCcmNonce) fail(ErrorCode::InvalidLength, "CCM nonce must be 13 bytes");
  // CCM authenticates the plaintext, so the keystream has to be applied first;
  // the candidate plaintext is wiped if the tag does not verify.
  Bytes plain = ctr_xor(cipher, detail::ccm_counter(nonce13, 1), ciphertext, 14);
  Block expected = detail::ccm_cbc_mac(cipher, nonce13, aad, plain);
  detail::xor_into(expected, cipher.encrypt_block(detail::ccm_counter(nonce13, 0)));
  if (!constant_time_equal(expected, tag)) {
    secure_zero(plain);
    fail(ErrorCode::TagMismatch);
  }
  return plain;
}

// ---------------------------------------------------------------------------
// EAX

namespace detail {

template <BlockCipher C>
Block omac(C& cipher, std::uint8_t domain, ByteView data) {
  Bytes msg(16, 0);
  msg[15] = domain;
  append(msg, data);
  return cmac(cipher, msg);
}

}  // namespace detail

template <BlockCipher C>
Sealed eax_seal(C& cipher, ByteView nonce, ByteView header, ByteView plaintext) {
  const Block n = detail::omac(cipher, 0, nonce);
  const Block h = detail::omac(cipher, 1, header);
  Sealed s;
  s.ciphertext = ctr_xor(cipher, n, plaintext);
  s.tag = detail::omac(cipher, 2, s.ciphertext);
  detail::xor_into(s.tag, n);
  detail::xor_into(s.tag, h);
  return s;
}

template <BlockCipher C>
Bytes eax_open(C& cipher, ByteView nonce, ByteView header, ByteView ciphertext,
               const Block& tag) {
  const Block n = detail::omac(cipher, 0, nonce);
  const Block h = detail::omac(cipher, 1, header);
  Block expected = detail::omac(cipher, 2, ciphertext);
  detail::xor_into(expected, n);
  detail::xor_into(expected, h);
  if (!constant_time_equal(expected, tag)) fail(ErrorCode::TagMismatch);
  return ctr_xor(cipher, n, ciphertext);
}

}  // namespace snfc::crypto
