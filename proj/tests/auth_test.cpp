// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <set>

#include "support.hpp"

namespace snfc {
namespace {

using test::Handshake;

DeviceIdentity other_identity() {
  Fixture fx;
  fx.master_key[0] ^= 0x5A;
  return fx.identity();
}

Bytes concat_nonces(ByteView a, ByteView b) { return concat({a, b}); }

TEST(Auth, ChallengeShape) {
  crypto::SeededEntropy rng(1), expected(1);
  AuthState r(Role::Reader);
  const Bytes m1 = reader_begin(r, rng);
  ASSERT_EQ(m1.size(), 16u);
  EXPECT_EQ(r.phase(), AuthPhase::ChallengeSent);
  const Block first = crypto::random_nonce(expected).value;
  EXPECT_EQ(m1, Bytes(first.begin(), first.end()));

  AuthState r2(Role::Reader);
  EXPECT_NE(reader_begin(r2, rng), m1);
}

TEST(Auth, ResponseCarriesReaderChallenge) {
  crypto::SeededEntropy rng(2);
  const auto id = test::default_identity();
  AuthState r(Role::Reader), d(Role::Device);
  const Bytes m1 = reader_begin(r, rng);
  const Bytes m2 = device_respond(d, id, m1, rng);
  ASSERT_EQ(m2.size(), 32u);
  crypto::Aes128 aes(id.master_key.bytes());
  const Bytes plain = crypto::cbc_decrypt(aes, Block{}, m2);
  EXPECT_EQ(Bytes(plain.begin() + 16, plain.end()), m1);
}

TEST(Auth, HonestHandshake) {
  crypto::SeededEntropy rng(3);
  Handshake hs(test::default_identity(), rng);
  EXPECT_EQ(hs.reader.phase(), AuthPhase::Authenticated);
  EXPECT_EQ(hs.device.phase(), AuthPhase::Authenticated);
  EXPECT_EQ(hs.reader_seed, hs.device_seed);
  // seed = nonce_R || nonce_D
  EXPECT_EQ(Bytes(hs.reader_seed.begin(), hs.reader_seed.begin() + 16), hs.m1);
  crypto::Aes128 aes(test::default_identity().master_key.bytes());
  const Bytes m2_plain = crypto::cbc_decrypt(aes, Block{}, hs.m2);
  EXPECT_EQ(Bytes(hs.reader_seed.begin() + 16, hs.reader_seed.end()),
            Bytes(m2_plain.begin(), m2_plain.begin() + 16));
}

TEST(Auth, ZeroChallengeRejected) {
  crypto::SeededEntropy rng(4);
  AuthState d(Role::Device);
  EXPECT_SNFC_ERROR(device_respond(d, test::default_identity(), Bytes(16, 0), rng),
                    ErrorCode::InvalidNonce);
  EXPECT_EQ(d.phase(), AuthPhase::Failed);
  AuthState d2(Role::Device);
  EXPECT_SNFC_ERROR(device_respond(d2, test::default_identity(), Bytes(15, 1), rng),
                    ErrorCode::MalformedMessage);
}

TEST(Auth, DeviceNeverEchoesReaderNonce) {
  // The device's first draw equals the reader challenge; it must draw again.
  Block r;
  r.fill(0x3C);
  Block fresh;
  fresh.fill(0x77);
  test::ScriptedEntropy rng({r, fresh});
  AuthState d(Role::Device);
  const Bytes m2 = device_respond(d, test::default_identity(), Bytes(r.begin(), r.end()), rng);
  crypto::Aes128 aes(test::default_identity().master_key.bytes());
  const Bytes plain = crypto::cbc_decrypt(aes, Block{}, m2);
  EXPECT_EQ(Bytes(plain.begin(), plain.begin() + 16), Bytes(fresh.begin(), fresh.end()));
}

TEST(Auth, ReaderRejectsEchoedNonce) {
  // A forged M2 whose device nonce equals the reader nonce.
  crypto::SeededEntropy rng(5);
  const auto id = test::default_identity();
  AuthState r(Role::Reader);
  const Bytes m1 = reader_begin(r, rng);
  crypto::Aes128 aes(id.master_key.bytes());
  const Bytes m2 = crypto::cbc_encrypt(aes, Block{}, concat_nonces(m1, m1));
  EXPECT_SNFC_ERROR(reader_finish(r, id, m2), ErrorCode::InvalidNonce);
  EXPECT_EQ(r.phase(), AuthPhase::Failed);
}

TEST(Auth, WrongMasterKey) {
  crypto::SeededEntropy rng(6);
  int successes = 0;
  for (int i = 0; i < 1000; ++i) {
    AuthState r(Role::Reader), d(Role::Device);
    const Bytes m1 = reader_begin(r, rng);
    const Bytes m2 = device_respond(d, other_identity(), m1, rng);
    try {
      (void)reader_finish(r, test::default_identity(), m2);
      ++successes;
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::ChallengeMismatch);
    }
  }
  EXPECT_EQ(successes, 0);
}

TEST(Auth, ReplayedResponseFromEarlierHandshake) {
  crypto::SeededEntropy rng(7);
  const auto id = test::default_identity();
  Handshake old(id, rng);
  AuthState r(Role::Reader);
  (void)reader_begin(r, rng);
  EXPECT_SNFC_ERROR(reader_finish(r, id, old.m2), ErrorCode::ChallengeMismatch);
}

TEST(Auth, ReflectedResponse) {
  crypto::SeededEntropy rng(8);
  const auto id = test::default_identity();
  AuthState r(Role::Reader), d(Role::Device);
  const Bytes m1 = reader_begin(r, rng);
  const Bytes m2 = device_respond(d, id, m1, rng);
  EXPECT_SNFC_ERROR(device_finish(d, id, m2), ErrorCode::ReflectionDetected);
  EXPECT_EQ(d.phase(), AuthPhase::Failed);
}

TEST(Auth, FuzzedMessagesNeverAuthenticate) {
  std::mt19937_64 fuzz(9);
  crypto::SeededEntropy rng(9);
  const auto id = test::default_identity();
  int false_accepts = 0;
  for (int i = 0; i < 10000; ++i) {
    Bytes junk(32);
    for (auto& b : junk) b = static_cast<std::uint8_t>(fuzz());
    AuthState r(Role::Reader), d(Role::Device);
    const Bytes m1 = reader_begin(r, rng);
    (void)device_respond(d, id, m1, rng);
    try {
      if (i % 2) {
        (void)reader_finish(r, id, junk);
      } else {
        (void)device_finish(d, id, junk);
      }
      ++false_accepts;
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::ChallengeMismatch);
    }
  }
  EXPECT_EQ(false_accepts, 0);
}

TEST(Auth, StateMachineOrdering) {
  crypto::SeededEntropy rng(10);
  const auto id = test::default_identity();
  AuthState r(Role::Reader);
  EXPECT_SNFC_ERROR(r.seed(), ErrorCode::InvalidState);
  EXPECT_SNFC_ERROR(reader_finish(r, id, Bytes(32, 1)), ErrorCode::InvalidState);
  AuthState d(Role::Device);
  EXPECT_SNFC_ERROR(reader_begin(d, rng), ErrorCode::InvalidState);

  // Failed is terminal until reset.
  (void)reader_begin(r, rng);
  EXPECT_THROW(reader_finish(r, id, Bytes(32, 1)), Error);
  EXPECT_EQ(r.phase(), AuthPhase::Failed);
  EXPECT_SNFC_ERROR(reader_begin(r, rng), ErrorCode::InvalidState);
  r.reset();
  EXPECT_EQ(r.phase(), AuthPhase::Idle);
  EXPECT_NO_THROW(reader_begin(r, rng));
}

TEST(Auth, NoWireBlockEncryptsPublicNonce) {
  crypto::SeededEntropy rng(11);
  const auto id = test::default_identity();
  crypto::Aes128 aes(id.master_key.bytes());
  for (int i = 0; i < 200; ++i) {
    Handshake hs(id, rng);
    const Block forbidden = aes.encrypt_block(to_array<16>(hs.m1));
    for (const Bytes* m : {&hs.m1, &hs.m2, &hs.m3}) {
      for (std::size_t off = 0; off + 16 <= m->size(); off += 16) {
        ASSERT_NE(to_array<16>(ByteView{*m}.subspan(off, 16)), forbidden);
      }
    }
  }
}

TEST(Auth, TranscriptsAndSeedsAreDistinct) {
  crypto::SeededEntropy rng(12);
  const auto id = test::default_identity();
  std::set<Bytes> m2s, m3s;
  std::set<Seed> seeds;
  for (int i = 0; i < 1000; ++i) {
    Handshake hs(id, rng);
    m2s.insert(hs.m2);
    m3s.insert(hs.m3);
    seeds.insert(hs.device_seed);
  }
  EXPECT_EQ(m2s.size(), 1000u);
  EXPECT_EQ(m3s.size(), 1000u);
  EXPECT_EQ(seeds.size(), 1000u);
}

TEST(DeviceAuthenticator, LockoutAfterRepeatedFailures) {
  crypto::SeededEntropy rng(13);
  const auto id = test::default_identity();
  DeviceAuthenticator dev(id, 5000);
  std::uint64_t now = 100;
  for (int i = 0; i < DeviceAuthenticator::kLockoutThreshold; ++i) {
    AuthState r(Role::Reader);
    (void)dev.respond(reader_begin(r, rng), rng, now);
    EXPECT_SNFC_ERROR(dev.finish(Bytes(32, 0x11), now), ErrorCode::ChallengeMismatch);
  }
  EXPECT_TRUE(dev.locked(now));
  AuthState r(Role::Reader);
  const Bytes m1 = reader_begin(r, rng);
  EXPECT_SNFC_ERROR(dev.respond(m1, rng, now + 4999), ErrorCode::LockedOut);
  EXPECT_FALSE(dev.locked(now + 5000));

  // After the lockout an honest handshake works and resets the count.
  const Bytes m2 = dev.respond(m1, rng, now + 5000);
  const Bytes m3 = reader_finish(r, id, m2);
  EXPECT_EQ(dev.finish(m3, now + 5001), r.seed());
  EXPECT_EQ(dev.consecutive_failures(), 0);
}

}  // namespace
}  // namespace snfc
