// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <array>

#include "snfc/bytes.hpp"
#include "snfc/error.hpp"

namespace snfc::crypto {

using Digest256 = std::array<std::uint8_t, 32>;

inline Digest256 hmac_sha256(ByteView key, ByteView message) {
  Digest256 out{};
  unsigned int len = 0;
  static constexpr std::uint8_t kEmpty = 0;
  const auto* data = message.empty() ? &kEmpty : message.data();
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data, message.size(),
           out.data(), &len) == nullptr ||
      len != out.size()) {
    fail(ErrorCode::InvalidKeyMaterial, "HMAC-SHA256 failed");
  }
  return out;
}

}  // namespace snfc::crypto
