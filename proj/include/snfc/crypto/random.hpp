// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <openssl/rand.h>

#include <random>

#include "snfc/bytes.hpp"
#include "snfc/error.hpp"

namespace snfc::crypto {

/// Source of random bytes. Implementations throw EntropyUnavailable when they
/// cannot deliver.
class EntropySource {
 public:
  virtual ~EntropySource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  Block block() {
    Block b{};
    fill(b);
    return b;
  }
};

/// Operating-system CSPRNG via OpenSSL.
class SystemEntropy final : public EntropySource {
 public:
  void fill(std::span<std::uint8_t> out) override {
    if (out.empty()) return;
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
      fail(ErrorCode::EntropyUnavailable, "RAND_bytes failed");
    }
  }
};

/// Reproducible stream for tests and seeded simulation runs. Not a CSPRNG.
class SeededEntropy final : public EntropySource {
 public:
  explicit SeededEntropy(std::uint64_t seed) : engine_(seed) {}

  void fill(std::span<std::uint8_t> out) override {
    std::size_t i = 0;
    while (i < out.size()) {
      std::uint64_t word = engine_();
      for (int k = 0; k < 8 && i < out.size(); ++k, ++i) {
        out[i] = static_cast<std::uint8_t>(word);
        word >>= 8;
      }
    }
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

struct Nonce128 {
  Block value{};
  bool operator==(const Nonce128&) const = default;
};

/// Rejects the guard patterns all-0x00 and all-0xFF. Equality with the peer
/// nonce is checked by the handshake, which holds both values.
inline bool validate_nonce(const Nonce128& n) noexcept {
  bool all_zero = true, all_ff = true;
  for (auto b : n.value) {
    all_zero &= b == 0x00;
    all_ff &= b == 0xFF;
  }
  return !all_zero && !all_ff;
}

inline constexpr int kNonceAttempts = 8;

inline Nonce128 random_nonce(EntropySource& rng) {
  for (int attempt = 0; attempt < kNonceAttempts; ++attempt) {
    Nonce128 n{rng.block()};
    if (validate_nonce(n)) return n;
  }
  fail(ErrorCode::EntropyUnavailable, "entropy source keeps producing guard values");
}

}  // namespace snfc::crypto
