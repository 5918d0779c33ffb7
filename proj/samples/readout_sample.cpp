// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

// Minimal use of the library without the simulator: handshake, session keys,
// one sealed READ_STATUS request and the status reply.

#include <cstdio>

#include "snfc/snfc.hpp"

int main() {
  using namespace snfc;

  const Fixture fx;  // built-in demo identity and pack
  const DeviceIdentity identity = fx.identity();
  BmsDevice device(fx.pack, PowerScenario::Active);
  crypto::SystemEntropy rng;

  AuthState reader(Role::Reader), bms(Role::Device);
  const Bytes m1 = reader_begin(reader, rng);
  const Bytes m2 = device_respond(bms, identity, m1, rng);
  const Bytes m3 = reader_finish(reader, identity, m2);
  device_finish(bms, identity, m3);

  auto reader_session = Session::open(reader.seed(), identity, CipherSuite::Gcm, SessionMode::ReadOnly);
  auto device_session = Session::open(bms.seed(), identity, CipherSuite::Gcm, SessionMode::ReadOnly);

  const Bytes request = wrap_ndef(encode_record(reader_session.seal_message(MessageType::ReadStatus, {}, rng)));
  const PlainMessage got = device_session.open_message(decode_record(unwrap_ndef(request)));
  std::printf("device received %s, counter %u\n", std::string(message_type_name(got.type)).c_str(), got.counter);

  const auto status = device.read_status(0);
  const SndefRecord reply = device_session.seal_message(MessageType::StatusData, status, rng);
  const auto pack = parse_status(reader_session.open_message(reply).data);
  std::printf("reader parsed %zu cells, SoH %u%%\n", pack.cell_mv.size(), pack.state_of_health);
  return 0;
}
