// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end scenarios on the simulated link: secure readouts, configuration
// updates, and the attack catalogue with its containment witnesses.

#pragma once

#include <algorithm>
#include <string>

#include "json.hpp"
#include "snfc/endpoints.hpp"
#include "snfc/fixture.hpp"
#include "snfc/transport.hpp"

namespace snfc {

inline constexpr SimTime kDefaultLinkLatencyMs = 5;

namespace exit_code {
inline constexpr int kSuccess = 0;
inline constexpr int kAuthFailure = 2;
inline constexpr int kChannelRejection = 3;
inline constexpr int kTimeout = 4;
inline constexpr int kAttackSucceeded = 5;
inline constexpr int kUsage = 64;
}  // namespace exit_code

struct ReadoutOptions {
  CipherSuite suite = CipherSuite::CbcCmac;
  std::optional<PowerScenario> scenario;  // overrides the fixture
  std::uint64_t seed = 1;
  bool wrong_key = false;
  bool raise_field = true;
  SimTime latency_ms = kDefaultLinkLatencyMs;
  SessionMode mode = SessionMode::ReadOnly;
  std::vector<Request> requests{Request{}};
  std::vector<AdversaryConfig> adversaries;
};

struct Witness {
  std::size_t plaintext_leak_matches = 0;
  std::size_t accepted_modified = 0;
  std::size_t duplicate_accepted = 0;
  std::size_t accepted_total = 0;
  std::vector<ErrorCode> rejections;

  bool saw(ErrorCode code) const {
    return std::find(rejections.begin(), rejections.end(), code) != rejections.end();
  }
};

struct ScenarioReport {
  std::string name = "readout";
  CipherSuite suite = CipherSuite::CbcCmac;
  PowerScenario power = PowerScenario::Active;
  std::uint64_t seed = 0;
  ReaderResult reader;
  SimTime auth_ms = 0;
  SimTime transmission_ms = 0;
  AuditLog log;
  std::vector<Frame> air_frames;  // frames as they reached the air (post-adversary)
  Witness witness;
  std::optional<AdversaryKind> attack;
  bool contained = true;
  std::string countermeasure;
  std::size_t config_deliveries_read_only = 0;

  Outcome outcome() const noexcept { return reader.outcome; }

  int exit_code() const noexcept {
    if (attack) return contained ? exit_code::kSuccess : exit_code::kAttackSucceeded;
    switch (reader.outcome) {
      case Outcome::Success: return exit_code::kSuccess;
      case Outcome::Timeout:
      case Outcome::Pending: return exit_code::kTimeout;
      case Outcome::Rejected:
        return reader.stage == FailureStage::Authentication ? exit_code::kAuthFailure
                                                            : exit_code::kChannelRejection;
    }
    return exit_code::kTimeout;
  }

  nlohmann::ordered_json to_json(bool include_wall_clock = true) const {
    using nlohmann::ordered_json;
    ordered_json j;
    j["scenario"] = name;
    j["suite"] = std::string(suite_name(suite));
    j["power_scenario"] = std::string(power_scenario_name(power));
    j["seed"] = seed;
    j["outcome"] = std::string(outcome_name(reader.outcome));
    if (reader.outcome == Outcome::Rejected) {
      j["reason"] = reader.error ? std::string(to_string(*reader.error)) : reader.reason;
      j["failure_stage"] = reader.stage == FailureStage::Authentication ? "authentication" : "channel";
    }
    j["exit_code"] = exit_code();
    ordered_json timings;
    timings["simulated"] = {{"auth_ms", auth_ms}, {"transmission_ms", transmission_ms}};
    if (include_wall_clock) {
      timings["wall_clock"] = {{"auth_ms", reader.wall_auth_ms},
                               {"transmission_ms", reader.wall_transmission_ms}};
    }
    j["timings"] = timings;
    j["auth_attempts"] = reader.auth_attempts;
    if (reader.status) {
      const auto& s = *reader.status;
      j["telemetry"] = {{"cell_mv", s.cell_mv},
                        {"temps_dC", s.temps_dc},
                        {"state_of_health", s.state_of_health},
                        {"cycle_count", s.cycle_count},
                        {"fault_flags", s.fault_flags},
                        {"lifetime_min_mv", s.lifetime_min_mv},
                        {"lifetime_max_temp_dC", s.lifetime_max_temp_dc}};
    } else {
      j["telemetry"] = nullptr;
    }
    if (reader.config_version) j["config_version"] = *reader.config_version;
    std::vector<std::string> rejections;
    for (auto c : witness.rejections) rejections.emplace_back(to_string(c));
    j["witness"] = {{"plaintext_leak_matches", witness.plaintext_leak_matches},
                    {"accepted_modified", witness.accepted_modified},
                    {"duplicate_accepted", witness.duplicate_accepted},
                    {"accepted_total", witness.accepted_total},
                    {"rejections", rejections}};
    if (attack) {
      j["attack"] = {{"kind", std::string(adversary_name(*attack))},
                     {"contained", contained},
                     {"countermeasure", countermeasure}};
    }
    j["audit_log_entries"] = log.entries().size();
    return j;
  }
};

/// Number of 4-byte windows of any plaintext that occur verbatim in an
/// observed frame. AUTH1 carries the public reader challenge and is skipped.
inline std::size_t count_plaintext_leaks(const std::vector<Bytes>& plaintexts,
                                         const std::vector<Frame>& frames) {
  std::size_t matches = 0;
  for (const auto& frame : frames) {
    if (frame.type == FrameType::Auth1) continue;
    const auto& hay = frame.payload;
    for (const auto& plain : plaintexts) {
      for (std::size_t i = 0; i + 4 <= plain.size(); ++i) {
        const auto window = ByteView{plain}.subspan(i, 4);
        if (std::search(hay.begin(), hay.end(), window.begin(), window.end()) != hay.end()) {
          ++matches;
        }
      }
    }
  }
  return matches;
}

namespace detail {

inline std::size_t count_not_in(const std::vector<Bytes>& accepted, const std::vector<Bytes>& sent) {
  std::size_t n = 0;
  for (const auto& a : accepted) {
    if (std::find(sent.begin(), sent.end(), a) == sent.end()) ++n;
  }
  return n;
}

inline std::size_t count_duplicates(const std::vector<Bytes>& accepted) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    if (std::find(accepted.begin(), accepted.begin() + static_cast<long>(i), accepted[i]) !=
        accepted.begin() + static_cast<long>(i)) {
      ++n;
    }
  }
  return n;
}

inline std::vector<Frame> air_frames(const AuditLog& log) {
  // The last copy of each transmission as it left the adversary pipeline:
  // a sent-frame entry followed by zero or more adversary entries.
  std::vector<Frame> out;
  for (const auto& e : log.entries()) {
    if (!e.frame_type || !e.payload_hex) continue;
    FrameType type = FrameType::Data;
    for (auto t : {FrameType::Auth1, FrameType::Auth2, FrameType::Auth3, FrameType::Data,
                   FrameType::Nak}) {
      if (frame_type_name(t) == *e.frame_type) type = t;
    }
    out.push_back(Frame{type, *from_hex(*e.payload_hex), e.tick});
  }
  return out;
}

}  // namespace detail

inline ScenarioReport run_readout(const Fixture& fixture, const ReadoutOptions& options,
                                  std::string name = "readout") {
  ScenarioReport report;
  report.name = std::move(name);
  report.suite = options.suite;
  report.power = options.scenario.value_or(fixture.scenario);
  report.seed = options.seed;

  const DeviceIdentity reader_identity = fixture.identity();
  Block device_key = fixture.master_key;
  if (options.wrong_key) {
    for (auto& b : device_key) b ^= 0xA5;
  }
  DeviceIdentity device_identity(fixture.serial, MasterKey{device_key},
                                 fixture.dev_add_data.value_or(Bytes(fixture.serial.begin(),
                                                                     fixture.serial.end())));
  secure_zero(device_key);

  BmsDevice device(fixture.pack, report.power, fixture.wake_latency_ms);
  ReaderConfig rc;
  rc.suite = options.suite;
  rc.mode = options.mode;
  rc.requests = options.requests;
  rc.raise_field = options.raise_field;

  Link link(options.latency_ms, options.adversaries, options.seed ^ 0xAD5E'0000'0000'0000ULL);
  ReaderEndpoint reader(reader_identity, rc, options.seed);
  DeviceEndpoint dev(device, device_identity, options.seed ^ 0xD0D0'D0D0'D0D0'D0D0ULL);
  link.attach(Side::Reader, reader);
  link.attach(Side::Device, dev);
  link.run_until_idle();

  report.reader = reader.result();
  const auto& r = report.reader;
  if (r.authenticated) {
    report.auth_ms = r.auth_completed - r.auth_started;
    report.transmission_ms = r.finished - r.auth_completed;
  } else {
    report.auth_ms = r.finished - r.auth_started;
  }
  report.log = link.log();
  report.air_frames = detail::air_frames(report.log);

  Witness& w = report.witness;
  const auto& rt = r.trace;
  const auto& dt = dev.trace();
  std::vector<Bytes> all_sent = rt.sent_plaintexts;
  all_sent.insert(all_sent.end(), dt.sent_plaintexts.begin(), dt.sent_plaintexts.end());
  std::vector<Frame> observed = report.air_frames;
  for (const auto& adv : link.adversaries()) {
    if (adv.config().kind == AdversaryKind::Eavesdrop) observed = adv.captured();
  }
  w.plaintext_leak_matches = count_plaintext_leaks(all_sent, observed);
  w.accepted_modified = detail::count_not_in(rt.accepted_plaintexts, dt.sent_plaintexts) +
                        detail::count_not_in(dt.accepted_plaintexts, rt.sent_plaintexts);
  w.duplicate_accepted = detail::count_duplicates(rt.accepted_plaintexts) +
                         detail::count_duplicates(dt.accepted_plaintexts);
  w.accepted_total = rt.accepted_plaintexts.size() + dt.accepted_plaintexts.size();
  w.rejections = rt.rejections;
  w.rejections.insert(w.rejections.end(), dt.rejections.begin(), dt.rejections.end());
  if (r.error && r.stage != FailureStage::None && !w.saw(*r.error)) w.rejections.push_back(*r.error);
  report.config_deliveries_read_only = static_cast<std::size_t>(std::count(
      dev.config_deliveries().begin(), dev.config_deliveries().end(), SessionMode::ReadOnly));
  return report;
}

struct AttackParams {
  std::size_t bit_offset = 37;
  std::size_t frame_index = 0;
  CipherSuite downgrade_target = CipherSuite::CbcCmac;
  double drop_probability = 1.0;
};

inline bool is_decode_error(ErrorCode c) noexcept {
  return c == ErrorCode::TruncatedRecord || c == ErrorCode::UnknownSuite ||
         c == ErrorCode::LengthMismatch || c == ErrorCode::InvalidRecord ||
         c == ErrorCode::InvalidLength;
}

/// Runs one attack scenario and judges containment from the witnesses.
inline ScenarioReport run_attack(const Fixture& fixture, AdversaryKind kind,
                                 const AttackParams& params, ReadoutOptions options) {
  AdversaryConfig adv;
  adv.kind = kind;
  adv.bit_offset = params.bit_offset;
  adv.frame_index = params.frame_index;
  adv.target_suite = static_cast<std::uint8_t>(params.downgrade_target);
  adv.drop_probability = params.drop_probability;
  options.adversaries = {adv};
  if (kind == AdversaryKind::Replay) {
    // Enough traffic for the chosen DATA frame to exist.
    const std::size_t reads = std::max<std::size_t>(3, params.frame_index / 2 + 2);
    options.requests.assign(reads, Request{});
  }

  ScenarioReport report = run_readout(fixture, options, "attack:" + std::string(adversary_name(kind)));
  report.attack = kind;
  const Witness& w = report.witness;
  const bool integrity = w.accepted_modified == 0 && w.duplicate_accepted == 0;
  switch (kind) {
    case AdversaryKind::None:
      report.contained = integrity;
      report.countermeasure = "none required";
      break;
    case AdversaryKind::Eavesdrop:
      report.contained = integrity && w.plaintext_leak_matches == 0;
      report.countermeasure = "C1 encrypted session channel";
      break;
    case AdversaryKind::TamperBit:
      report.contained = integrity;
      if (w.saw(ErrorCode::TagMismatch)) {
        report.countermeasure = "C1 MAC check";
      } else if (std::any_of(w.rejections.begin(), w.rejections.end(), is_decode_error)) {
        report.countermeasure = "C1 record validation";
      } else {
        report.countermeasure = "none fired (tampered bit outside traffic)";
      }
      break;
    case AdversaryKind::Replay:
      report.contained = integrity;
      report.countermeasure = w.saw(ErrorCode::ReplayDetected) ? "C4 counter" : "none fired";
      break;
    case AdversaryKind::Downgrade:
      report.contained = integrity && (options.suite == params.downgrade_target || w.accepted_total == 0);
      if (w.saw(ErrorCode::TagMismatch) || w.saw(ErrorCode::SuiteMismatch)) {
        report.countermeasure = "C1 authenticated suite byte";
      } else if (std::any_of(w.rejections.begin(), w.rejections.end(), is_decode_error)) {
        report.countermeasure = "C1 record validation (length invalid for rewritten suite)";
      } else {
        report.countermeasure = "none fired";
      }
      break;
    case AdversaryKind::Drop:
      report.contained = integrity;
      report.countermeasure = "R1 residual risk: denial of service ends in reader timeout";
      break;
  }
  return report;
}

}  // namespace snfc
