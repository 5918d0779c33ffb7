// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

namespace snfc {
namespace {

/// Raises the field and sends scripted frames at start.
struct ScriptedSender : LinkEndpoint {
  std::vector<Frame> script;
  bool raise_field = true;
  void on_start(Link& link) override {
    if (raise_field) link.field_set(true);
    for (auto& f : script) link.transmit(Side::Reader, f);
  }
  void on_frame(Link&, const Frame&) override {}
};

struct Recorder : LinkEndpoint {
  std::vector<Frame> frames;
  std::vector<SimTime> at;
  bool is_powered = true;
  void on_frame(Link& link, const Frame& f) override {
    frames.push_back(f);
    at.push_back(link.now());
  }
  bool powered(SimTime) const override { return is_powered; }
};

Frame data_frame(std::uint8_t fill, std::size_t n = 60) {
  return Frame{FrameType::Data, Bytes(n, fill), 0};
}

struct Harness {
  Link link;
  ScriptedSender reader;
  Recorder device;
  explicit Harness(SimTime latency, std::vector<AdversaryConfig> adv = {}, std::uint64_t seed = 1)
      : link(latency, std::move(adv), seed) {
    link.attach(Side::Reader, reader);
    link.attach(Side::Device, device);
  }
};

TEST(Link, LatencyZeroDeliversSameTick) {
  Harness h(0);
  h.reader.script = {data_frame(1)};
  h.link.run_until_idle();
  ASSERT_EQ(h.device.frames.size(), 1u);
  EXPECT_EQ(h.device.at[0], 0u);
  EXPECT_EQ(h.device.frames[0].payload, Bytes(60, 1));
}

TEST(Link, FixedLatency) {
  Harness h(15);
  h.reader.script = {data_frame(1), data_frame(2)};
  h.link.run_until_idle();
  ASSERT_EQ(h.device.frames.size(), 2u);
  EXPECT_EQ(h.device.at[0], 15u);
  EXPECT_EQ(h.device.frames[0].timestamp, 0u);
  // FIFO among frames sent in the same tick.
  EXPECT_EQ(h.device.frames[1].payload[0], 2);
}

TEST(Link, NoFieldNoDelivery) {
  Harness h(5);
  h.reader.raise_field = false;
  h.reader.script = {data_frame(1)};
  h.link.run_until_idle();
  EXPECT_TRUE(h.device.frames.empty());
  EXPECT_TRUE(h.link.log().has_event("dropped:no_field"));
}

TEST(Link, FieldOffDropsFramesInFlight) {
  struct Cutter : ScriptedSender {
    void on_start(Link& link) override {
      ScriptedSender::on_start(link);
      link.field_set(false);
      link.field_set(true);
    }
  };
  Link link(10);
  Cutter reader;
  Recorder device;
  reader.script = {data_frame(1)};
  link.attach(Side::Reader, reader);
  link.attach(Side::Device, device);
  link.run_until_idle();
  EXPECT_TRUE(device.frames.empty());
  EXPECT_TRUE(link.log().has_event("dropped:no_field"));
}

TEST(Link, UnpoweredReceiverAndSender) {
  Harness h(5);
  h.device.is_powered = false;
  h.reader.script = {data_frame(1)};
  h.link.run_until_idle();
  EXPECT_TRUE(h.device.frames.empty());
  EXPECT_TRUE(h.link.log().has_event("dropped:unpowered"));
  EXPECT_SNFC_ERROR(h.link.transmit(Side::Device, data_frame(2)), ErrorCode::EndpointUnpowered);
}

TEST(Link, FrameTooLarge) {
  Harness h(5);
  EXPECT_SNFC_ERROR(h.link.transmit(Side::Reader, data_frame(0, 257)), ErrorCode::FrameTooLarge);
  EXPECT_NO_THROW(h.link.transmit(Side::Reader, data_frame(0, 256)));
}

TEST(Link, LivelockGuard) {
  struct Bouncer : LinkEndpoint {
    Side side;
    explicit Bouncer(Side s) : side(s) {}
    void on_start(Link& link) override {
      if (side == Side::Reader) {
        link.field_set(true);
        link.transmit(side, data_frame(0, 4));
      }
    }
    void on_frame(Link& link, const Frame& f) override { link.transmit(side, f); }
  };
  Link link(1, {}, 0, 500);
  Bouncer a(Side::Reader), b(Side::Device);
  link.attach(Side::Reader, a);
  link.attach(Side::Device, b);
  EXPECT_SNFC_ERROR(link.run_until_idle(), ErrorCode::LivelockDetected);
  EXPECT_TRUE(link.log().has_event("livelock"));
}

TEST(Adversary, DropAll) {
  AdversaryConfig drop{AdversaryKind::Drop};
  drop.drop_probability = 1.0;
  Harness h(5, {drop});
  h.reader.script = {data_frame(1), data_frame(2), data_frame(3)};
  h.link.run_until_idle();
  EXPECT_TRUE(h.device.frames.empty());
}

TEST(Adversary, DropNone) {
  AdversaryConfig drop{AdversaryKind::Drop};
  drop.drop_probability = 0.0;
  Harness h(5, {drop});
  h.reader.script = {data_frame(1), data_frame(2)};
  h.link.run_until_idle();
  EXPECT_EQ(h.device.frames.size(), 2u);
}

TEST(Adversary, EavesdropCapturesExactBytes) {
  Harness h(5, {AdversaryConfig{AdversaryKind::Eavesdrop}});
  h.reader.script = {data_frame(7), Frame{FrameType::Auth1, Bytes(18, 3), 0}};
  h.link.run_until_idle();
  ASSERT_EQ(h.link.adversaries().size(), 1u);
  const auto& cap = h.link.adversaries()[0].captured();
  ASSERT_EQ(cap.size(), 2u);
  EXPECT_EQ(cap[0].payload, Bytes(60, 7));
  EXPECT_EQ(h.device.frames.size(), 2u);
  EXPECT_EQ(h.device.frames[0].payload, Bytes(60, 7));
}

TEST(Adversary, TamperFlipsOneRecordBit) {
  AdversaryConfig t{AdversaryKind::TamperBit};
  t.bit_offset = 37;
  t.frame_index = 1;
  Harness h(5, {t});
  h.reader.script = {data_frame(0), data_frame(0)};
  h.link.run_until_idle();
  ASSERT_EQ(h.device.frames.size(), 2u);
  EXPECT_EQ(h.device.frames[0].payload, Bytes(60, 0));
  Bytes expected(60, 0);
  expected[8 + 37 / 8] = static_cast<std::uint8_t>(0x80 >> (37 % 8));
  EXPECT_EQ(h.device.frames[1].payload, expected);
}

TEST(Adversary, ReplayDuplicatesChosenFrame) {
  AdversaryConfig r{AdversaryKind::Replay};
  r.frame_index = 2;
  Harness h(5, {r});
  h.reader.script = {data_frame(0), data_frame(1), data_frame(2), data_frame(3)};
  h.link.run_until_idle();
  ASSERT_EQ(h.device.frames.size(), 5u);
  EXPECT_EQ(h.device.frames[2].payload, h.device.frames[3].payload);
  EXPECT_EQ(h.device.frames[3].payload[0], 2);
}

TEST(Adversary, DowngradeRewritesSuiteBytes) {
  AdversaryConfig d{AdversaryKind::Downgrade};
  d.target_suite = 0x01;
  Harness h(5, {d});
  Bytes auth1(18, 0x42);
  auth1[16] = 0x02;
  Bytes data(60, 0);
  data[8] = 0x02;
  h.reader.script = {Frame{FrameType::Auth1, auth1, 0}, Frame{FrameType::Data, data, 0}};
  h.link.run_until_idle();
  ASSERT_EQ(h.device.frames.size(), 2u);
  EXPECT_EQ(h.device.frames[0].payload[16], 0x01);
  EXPECT_EQ(h.device.frames[1].payload[8], 0x01);
}

TEST(AuditLog, JsonlFields) {
  Harness h(5, {AdversaryConfig{AdversaryKind::Eavesdrop}});
  h.reader.script = {data_frame(9, 2)};
  h.link.run_until_idle();
  const std::string jsonl = h.link.log().to_jsonl();
  std::size_t lines = 0;
  for (std::size_t pos = 0; (pos = jsonl.find('\n', pos)) != std::string::npos; ++pos) ++lines;
  EXPECT_EQ(lines, h.link.log().entries().size());
  const auto first = nlohmann::json::parse(jsonl.substr(0, jsonl.find('\n')));
  for (const char* key : {"tick", "direction", "frame_type", "payload_hex", "adversary_action", "endpoint_event"}) {
    EXPECT_TRUE(first.contains(key)) << key;
  }
  EXPECT_NE(jsonl.find("\"payload_hex\":\"0909\""), std::string::npos);
  EXPECT_NE(jsonl.find("eavesdrop:capture"), std::string::npos);
}

// --- full protocol over the link ---------------------------------------------

std::vector<std::string> frame_sequence(const AuditLog& log) {
  std::vector<std::string> out;
  for (const auto* e : log.sent_frames()) out.push_back(*e->frame_type);
  return out;
}

TEST(Readout, HonestFrameSequence) {
  ReadoutOptions opt;
  opt.suite = CipherSuite::Gcm;
  const auto report = run_readout(Fixture{}, opt);
  ASSERT_EQ(report.outcome(), Outcome::Success) << report.reader.reason;
  EXPECT_EQ(frame_sequence(report.log),
            (std::vector<std::string>{"AUTH1", "AUTH2", "AUTH3", "DATA", "DATA"}));
  EXPECT_TRUE(report.log.has_event("accepted:READ_STATUS"));
  ASSERT_TRUE(report.reader.status);
  EXPECT_EQ(report.reader.status->cell_mv, Fixture{}.pack.cell_mv);
  EXPECT_EQ(report.auth_ms, 2 * kDefaultLinkLatencyMs);
}

TEST(Readout, OnRestWakesThenAnswers) {
  ReadoutOptions opt;
  opt.scenario = PowerScenario::OnRest;
  const auto report = run_readout(Fixture{}, opt);
  ASSERT_EQ(report.outcome(), Outcome::Success) << report.reader.reason;
  // First AUTH1 reaches an unpowered device; the retry after the wake latency works.
  EXPECT_TRUE(report.log.has_event("dropped:unpowered"));
  EXPECT_GE(report.reader.auth_attempts, 2);
}

TEST(Readout, OnRestWithoutFieldTimesOut) {
  ReadoutOptions opt;
  opt.scenario = PowerScenario::OnRest;
  opt.raise_field = false;
  const auto report = run_readout(Fixture{}, opt);
  EXPECT_EQ(report.outcome(), Outcome::Timeout);
  EXPECT_EQ(report.exit_code(), exit_code::kTimeout);
}

TEST(Readout, DropEndsInTimeout) {
  ReadoutOptions opt;
  AdversaryConfig drop{AdversaryKind::Drop};
  opt.adversaries = {drop};
  const auto report = run_readout(Fixture{}, opt);
  EXPECT_EQ(report.outcome(), Outcome::Timeout);
  const auto& last = report.log.entries().back();
  ASSERT_TRUE(last.endpoint_event.has_value());
  EXPECT_TRUE(report.log.has_event("timeout"));
}

TEST(Readout, WrongKey) {
  ReadoutOptions opt;
  opt.wrong_key = true;
  const auto report = run_readout(Fixture{}, opt);
  EXPECT_EQ(report.outcome(), Outcome::Rejected);
  EXPECT_EQ(report.reader.error, ErrorCode::ChallengeMismatch);
  EXPECT_EQ(report.exit_code(), exit_code::kAuthFailure);
}

TEST(Readout, ConfigUpdateInReadWriteSession) {
  ReadoutOptions opt;
  opt.mode = SessionMode::ReadWrite;
  opt.requests = {Request{MessageType::UpdateConfig, Bytes{0x00, 0x03, 0x00, 0x28}}, Request{}};
  const auto report = run_readout(Fixture{}, opt);
  ASSERT_EQ(report.outcome(), Outcome::Success) << report.reader.reason;
  EXPECT_EQ(report.reader.config_version, 1u);
}

TEST(Readout, FieldLossForcesReauthentication) {
  const Fixture fx;
  BmsDevice device(fx.pack, PowerScenario::Active);
  DeviceEndpoint dev(device, fx.identity(), 3);

  Link first(5);
  ReaderEndpoint reader(fx.identity(), ReaderConfig{}, 4);
  first.attach(Side::Reader, reader);
  first.attach(Side::Device, dev);
  first.run_until_idle();
  ASSERT_EQ(reader.result().outcome, Outcome::Success);
  EXPECT_TRUE(first.log().has_event("session_closed:field_off"));
  EXPECT_FALSE(dev.session().has_value());

  // A DATA frame from the finished session on the next contact is refused.
  Bytes stale;
  for (const auto* e : first.log().sent_frames()) {
    if (*e->frame_type == "DATA" && e->direction == "reader->device") stale = *from_hex(*e->payload_hex);
  }
  Link second(5);
  ScriptedSender replayer;
  replayer.script = {Frame{FrameType::Data, stale, 0}};
  second.attach(Side::Reader, replayer);
  second.attach(Side::Device, dev);
  second.run_until_idle();
  EXPECT_TRUE(second.log().has_event("reject:InvalidState"));

  // A new handshake succeeds.
  Link third(5);
  ReaderEndpoint again(fx.identity(), ReaderConfig{}, 5);
  third.attach(Side::Reader, again);
  third.attach(Side::Device, dev);
  third.run_until_idle();
  EXPECT_EQ(again.result().outcome, Outcome::Success);
}

TEST(Attack, Countermeasures) {
  ReadoutOptions opt;
  opt.seed = 5;
  const Fixture fx;

  auto replay = run_attack(fx, AdversaryKind::Replay, {.frame_index = 2}, opt);
  EXPECT_TRUE(replay.contained);
  EXPECT_EQ(replay.countermeasure, "C4 counter");
  EXPECT_TRUE(replay.witness.saw(ErrorCode::ReplayDetected));

  auto tamper = run_attack(fx, AdversaryKind::TamperBit, {.bit_offset = 37}, opt);
  EXPECT_TRUE(tamper.contained);
  EXPECT_EQ(tamper.countermeasure, "C1 MAC check");

  auto eaves = run_attack(fx, AdversaryKind::Eavesdrop, {}, opt);
  EXPECT_TRUE(eaves.contained);
  EXPECT_EQ(eaves.witness.plaintext_leak_matches, 0u);
  EXPECT_EQ(eaves.outcome(), Outcome::Success);

  auto drop = run_attack(fx, AdversaryKind::Drop, {}, opt);
  EXPECT_TRUE(drop.contained);
  EXPECT_EQ(drop.outcome(), Outcome::Timeout);
}

TEST(Attack, DowngradeGcmToCbc) {
  ReadoutOptions opt;
  opt.suite = CipherSuite::Gcm;
  const auto report = run_attack(Fixture{}, AdversaryKind::Downgrade, {}, opt);
  EXPECT_TRUE(report.contained);
  EXPECT_EQ(report.witness.accepted_total, 0u);
  EXPECT_FALSE(report.witness.rejections.empty());
}

TEST(Attack, DowngradeToSameLengthSuiteHitsTag) {
  ReadoutOptions opt;
  opt.suite = CipherSuite::Gcm;
  AttackParams p;
  p.downgrade_target = CipherSuite::Ccm;
  const auto report = run_attack(Fixture{}, AdversaryKind::Downgrade, p, opt);
  EXPECT_TRUE(report.contained);
  EXPECT_EQ(report.witness.accepted_total, 0u);
  EXPECT_TRUE(report.witness.saw(ErrorCode::TagMismatch) || report.witness.saw(ErrorCode::SuiteMismatch));
  EXPECT_EQ(report.countermeasure, "C1 authenticated suite byte");
}

TEST(Determinism, SameSeedSameAuditLog) {
  for (auto kind : {AdversaryKind::None, AdversaryKind::TamperBit, AdversaryKind::Drop}) {
    ReadoutOptions opt;
    opt.seed = 77;
    AttackParams p;
    p.drop_probability = 0.5;
    const auto a = run_attack(Fixture{}, kind, p, opt);
    const auto b = run_attack(Fixture{}, kind, p, opt);
    EXPECT_EQ(a.log.to_jsonl(), b.log.to_jsonl()) << adversary_name(kind);
    EXPECT_EQ(a.to_json(false).dump(), b.to_json(false).dump());
  }
  ReadoutOptions o1, o2;
  o1.seed = 1;
  o2.seed = 2;
  EXPECT_NE(run_readout(Fixture{}, o1).log.to_jsonl(), run_readout(Fixture{}, o2).log.to_jsonl());
}

}  // namespace
}  // namespace snfc
