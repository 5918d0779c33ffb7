// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <openssl/evp.h>

#include <concepts>
#include <memory>

#include "snfc/bytes.hpp"
#include "snfc/error.hpp"

namespace snfc::crypto {

/// A 128-bit block permutation keyed at construction. The modes in modes.hpp
/// are written against this so tests can substitute an instrumented cipher.
template <typename C>
concept BlockCipher = std::constructible_from<C, ByteView> &&
                      requires(C& c, const Block& in) {
                        { c.encrypt_block(in) } -> std::same_as<Block>;
                        { c.decrypt_block(in) } -> std::same_as<Block>;
                      };

/// AES-128 single-block permutation backed by OpenSSL (ECB, no padding).
class Aes128 {
 public:
  explicit Aes128(ByteView key) {
    if (key.size() != 16) fail(ErrorCode::InvalidKeyMaterial, "AES-128 key must be 16 bytes");
    std::copy(key.begin(), key.end(), key_.begin());
  }
  ~Aes128() { secure_zero(key_); }

  Aes128(const Aes128&) = delete;
  Aes128& operator=(const Aes128&) = delete;
  Aes128(Aes128&&) noexcept = default;
  Aes128& operator=(Aes128&&) noexcept = default;

  Block encrypt_block(const Block& in) { return run(enc_, in, 1); }
  Block decrypt_block(const Block& in) { return run(dec_, in, 0); }

 private:
  struct CtxFree {
    void operator()(EVP_CIPHER_CTX* ctx) const noexcept { EVP_CIPHER_CTX_free(ctx); }
  };
  using Ctx = std::unique_ptr<EVP_CIPHER_CTX, CtxFree>;

  Block run(Ctx& ctx, const Block& in, int encrypt) {
    if (!ctx) {
      ctx.reset(EVP_CIPHER_CTX_new());
      if (!ctx || EVP_CipherInit_ex(ctx.get(), EVP_aes_128_ecb(), nullptr, key_.data(),
                                    nullptr, encrypt) != 1) {
        fail(ErrorCode::InvalidKeyMaterial, "OpenSSL AES init failed");
      }
      EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
    }
    Block out{};
    int len = 0;
    if (EVP_CipherUpdate(ctx.get(), out.data(), &len, in.data(), 16) != 1 || len != 16) {
      fail(ErrorCode::InvalidKeyMaterial, "OpenSSL AES block operation failed");
    }
    return out;
  }

  Block key_{};
  Ctx enc_;
  Ctx dec_;
};

static_assert(BlockCipher<Aes128>);

}  // namespace snfc::crypto
