// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

// Protocol drivers that sit on a Link: the mobile reader and the BMS device.
//
// Frame payloads:
//   AUTH1  M1 (16) || suite (1) || session mode (1)
//   AUTH2  M2 (32)
//   AUTH3  M3 (32)
//   DATA   SNDEF record wrapped in a short NDEF record
//   NAK    stage (1: 0 = authentication, 1 = channel) || error code (1)

#pragma once

#include <chrono>
#include <memory>
#include <set>

#include "snfc/auth.hpp"
#include "snfc/codec.hpp"
#include "snfc/crypto/random.hpp"
#include "snfc/device.hpp"
#include "snfc/session.hpp"
#include "snfc/transport.hpp"

namespace snfc {

enum class NakStage : std::uint8_t { Authentication = 0, Channel = 1 };

inline Frame make_nak(NakStage stage, ErrorCode code) {
  return Frame{FrameType::Nak,
               {static_cast<std::uint8_t>(stage), static_cast<std::uint8_t>(code)}, 0};
}

struct Request {
  MessageType type = MessageType::ReadStatus;
  Bytes data;
};

enum class Outcome { Pending, Success, Rejected, Timeout };

constexpr std::string_view outcome_name(Outcome o) noexcept {
  switch (o) {
    case Outcome::Pending: return "Pending";
    case Outcome::Success: return "Success";
    case Outcome::Rejected: return "Rejected";
    case Outcome::Timeout: return "Timeout";
  }
  return "Unknown";
}

enum class FailureStage { None, Authentication, Channel };

/// What one endpoint accepted and sent on the secure channel, in order. Used
/// by the attack witnesses.
struct ChannelTrace {
  std::vector<Bytes> sent_plaintexts;      // encode_plain of each sealed message
  std::vector<Bytes> accepted_plaintexts;  // encode_plain of each opened message
  std::vector<ErrorCode> rejections;
};

struct ReaderConfig {
  CipherSuite suite = CipherSuite::CbcCmac;
  SessionMode mode = SessionMode::ReadOnly;
  std::vector<Request> requests{Request{}};
  SimTime response_timeout_ms = 50;
  int auth_attempts = 4;
  bool raise_field = true;
  bool lower_field_when_done = true;
};

struct ReaderResult {
  Outcome outcome = Outcome::Pending;
  FailureStage stage = FailureStage::None;
  std::optional<ErrorCode> error;
  std::string reason;
  std::optional<BatteryPackState> status;
  std::optional<std::uint32_t> config_version;
  bool authenticated = false;
  SimTime auth_started = 0, auth_completed = 0, finished = 0;
  double wall_auth_ms = 0, wall_transmission_ms = 0;
  int auth_attempts = 0;
  ChannelTrace trace;
};

class ReaderEndpoint final : public LinkEndpoint {
 public:
  ReaderEndpoint(DeviceIdentity identity, ReaderConfig config, std::uint64_t seed)
      : identity_(std::move(identity)), config_(std::move(config)), rng_(seed) {}

  const ReaderResult& result() const noexcept { return result_; }
  const std::optional<Session>& session() const noexcept { return session_; }

  void on_start(Link& link) override {
    wall_start_ = Clock::now();
    result_.auth_started = link.now();
    if (config_.raise_field) link.field_set(true);
    start_handshake(link);
  }

  void on_timer(Link& link, std::uint64_t id) override {
    if (id != timer_id_ || done()) return;
    if (stage_ == Stage::AwaitAuth2 && result_.auth_attempts < config_.auth_attempts) {
      link.log_event(Side::Reader, "auth_retry");
      start_handshake(link);
      return;
    }
    link.log_event(Side::Reader, "timeout");
    finish(link, Outcome::Timeout, FailureStage::None, std::nullopt, "no response");
  }

  void on_frame(Link& link, const Frame& frame) override {
    if (done()) return;
    try {
      switch (frame.type) {
        case FrameType::Auth2:
          if (stage_ != Stage::AwaitAuth2) break;
          handle_auth2(link, frame);
          return;
        case FrameType::Data:
          if (stage_ != Stage::AwaitResponse) break;
          handle_data(link, frame);
          return;
        case FrameType::Nak:
          handle_nak(link, frame);
          return;
        default:
          break;
      }
      link.log_event(Side::Reader, "ignored:" + std::string(frame_type_name(frame.type)));
    } catch (const Error& e) {
      const bool in_auth = stage_ == Stage::AwaitAuth2;
      result_.trace.rejections.push_back(e.code());
      link.log_event(Side::Reader, "reject:" + std::string(to_string(e.code())));
      finish(link, Outcome::Rejected, in_auth ? FailureStage::Authentication : FailureStage::Channel,
             e.code(), e.what());
    }
  }

 private:
  using Clock = std::chrono::steady_clock;
  enum class Stage { Idle, AwaitAuth2, AwaitResponse, Done };

  bool done() const noexcept { return stage_ == Stage::Done; }

  void arm_timer(Link& link) { link.set_timer(Side::Reader, config_.response_timeout_ms, ++timer_id_); }

  void start_handshake(Link& link) {
    ++result_.auth_attempts;
    auth_ = AuthState(Role::Reader);
    Bytes payload = reader_begin(auth_, rng_);
    payload.push_back(static_cast<std::uint8_t>(config_.suite));
    payload.push_back(static_cast<std::uint8_t>(config_.mode));
    stage_ = Stage::AwaitAuth2;
    link.transmit(Side::Reader, Frame{FrameType::Auth1, std::move(payload), 0});
    arm_timer(link);
  }

  void handle_auth2(Link& link, const Frame& frame) {
    Bytes m3 = reader_finish(auth_, identity_, frame.payload);
    session_.emplace(Session::open(auth_.seed(), identity_, config_.suite, config_.mode));
    result_.authenticated = true;
    result_.auth_completed = link.now();
    wall_auth_done_ = Clock::now();
    link.log_event(Side::Reader, "authenticated");
    link.transmit(Side::Reader, Frame{FrameType::Auth3, std::move(m3), 0});
    send_next(link);
  }

  void send_next(Link& link) {
    if (next_request_ >= config_.requests.size()) {
      link.log_event(Side::Reader, "session_complete");
      finish(link, Outcome::Success, FailureStage::None, std::nullopt, {});
      return;
    }
    const Request& req = config_.requests[next_request_++];
    PlainMessage sealed;
    SndefRecord rec = session_->seal_message(req.type, req.data, rng_, &sealed);
    result_.trace.sent_plaintexts.push_back(encode_plain(sealed));
    stage_ = Stage::AwaitResponse;
    link.transmit(Side::Reader, Frame{FrameType::Data, wrap_ndef(encode_record(rec)), 0});
    arm_timer(link);
  }

  void handle_data(Link& link, const Frame& frame) {
    const SndefRecord rec = decode_record(unwrap_ndef(frame.payload));
    const PlainMessage msg = session_->open_message(rec);
    result_.trace.accepted_plaintexts.push_back(encode_plain(msg));
    switch (msg.type) {
      case MessageType::StatusData:
        result_.status = parse_status(msg.data);
        break;
      case MessageType::Ack:
        if (msg.data.size() == 4) result_.config_version = get_be32(msg.data, 0);
        break;
      case MessageType::Error: {
        const auto code = msg.data.empty() ? ErrorCode::InvalidState
                                           : static_cast<ErrorCode>(msg.data[0]);
        link.log_event(Side::Reader, "device_error:" + std::string(to_string(code)));
        finish(link, Outcome::Rejected, FailureStage::Channel, code, "device reported an error");
        return;
      }
      default:
        fail(ErrorCode::UnknownMessageType, "unexpected message from device");
    }
    send_next(link);
  }

  void handle_nak(Link& link, const Frame& frame) {
    if (frame.payload.size() != 2 || frame.payload[1] > static_cast<std::uint8_t>(ErrorCode::IoError)) {
      link.log_event(Side::Reader, "ignored:malformed_nak");
      return;
    }
    const auto stage = frame.payload[0] == 0 ? FailureStage::Authentication : FailureStage::Channel;
    const auto code = static_cast<ErrorCode>(frame.payload[1]);
    link.log_event(Side::Reader, "nak:" + std::string(to_string(code)));
    finish(link, Outcome::Rejected, stage, code, "device rejected: " + std::string(to_string(code)));
  }

  void finish(Link& link, Outcome outcome, FailureStage stage, std::optional<ErrorCode> code,
              std::string reason) {
    stage_ = Stage::Done;
    result_.outcome = outcome;
    result_.stage = stage;
    result_.error = code;
    result_.reason = std::move(reason);
    result_.finished = link.now();
    const auto end = Clock::now();
    const auto auth_end = result_.authenticated ? wall_auth_done_ : end;
    result_.wall_auth_ms = std::chrono::duration<double, std::milli>(auth_end - wall_start_).count();
    result_.wall_transmission_ms =
        result_.authenticated ? std::chrono::duration<double, std::milli>(end - wall_auth_done_).count() : 0.0;
    if (session_) session_->close();
    if (config_.lower_field_when_done && link.field()) link.field_set(false);
  }

  DeviceIdentity identity_;
  ReaderConfig config_;
  crypto::SeededEntropy rng_;
  AuthState auth_{Role::Reader};
  std::optional<Session> session_;
  Stage stage_ = Stage::Idle;
  std::size_t next_request_ = 0;
  std::uint64_t timer_id_ = 0;
  ReaderResult result_;
  Clock::time_point wall_start_{}, wall_auth_done_{};
};

class DeviceEndpoint final : public LinkEndpoint {
 public:
  DeviceEndpoint(BmsDevice& device, DeviceIdentity identity, std::uint64_t seed)
      : device_(device), auth_(std::move(identity)), rng_(seed) {}

  const ChannelTrace& trace() const noexcept { return trace_; }
  const DeviceAuthenticator& authenticator() const noexcept { return auth_; }
  const std::optional<Session>& session() const noexcept { return session_; }
  /// UPDATE_CONFIG plaintexts handed to the device model, with the session
  /// mode they arrived under.
  const std::vector<SessionMode>& config_deliveries() const noexcept { return config_deliveries_; }

  bool powered(SimTime now) const override { return device_.powered(now); }

  void on_field(Link& link, bool on) override {
    if (on) {
      device_.wake_up(link.now());
      return;
    }
    device_.field_lost();
    if (session_ && session_->is_open()) link.log_event(Side::Device, "session_closed:field_off");
    session_.reset();
    auth_.abort();
  }

  void on_frame(Link& link, const Frame& frame) override {
    switch (frame.type) {
      case FrameType::Auth1: handle_auth1(link, frame); break;
      case FrameType::Auth3: handle_auth3(link, frame); break;
      case FrameType::Data: handle_data(link, frame); break;
      default: link.log_event(Side::Device, "ignored:" + std::string(frame_type_name(frame.type)));
    }
  }

 private:
  void reject(Link& link, NakStage stage, ErrorCode code) {
    trace_.rejections.push_back(code);
    link.log_event(Side::Device, "reject:" + std::string(to_string(code)));
    link.transmit(Side::Device, make_nak(stage, code));
  }

  void handle_auth1(Link& link, const Frame& frame) {
    session_.reset();
    const auto& p = frame.payload;
    if (p.size() != kChallengeLength + 2 || !is_known_suite(p[16]) || p[17] > 1) {
      reject(link, NakStage::Authentication, ErrorCode::MalformedMessage);
      return;
    }
    pending_suite_ = static_cast<CipherSuite>(p[16]);
    pending_mode_ = static_cast<SessionMode>(p[17]);
    try {
      Bytes m2 = auth_.respond(ByteView{p}.first(kChallengeLength), rng_, link.now());
      link.transmit(Side::Device, Frame{FrameType::Auth2, std::move(m2), 0});
    } catch (const Error& e) {
      reject(link, NakStage::Authentication, e.code());
    }
  }

  void handle_auth3(Link& link, const Frame& frame) {
    try {
      const Seed seed = auth_.finish(frame.payload, link.now());
      session_.emplace(Session::open(seed, auth_.identity(), pending_suite_, pending_mode_));
      link.log_event(Side::Device, "authenticated");
    } catch (const Error& e) {
      reject(link, NakStage::Authentication, e.code());
    }
  }

  void handle_data(Link& link, const Frame& frame) {
    if (!session_) {
      reject(link, NakStage::Channel, ErrorCode::InvalidState);
      return;
    }
    PlainMessage msg;
    try {
      msg = session_->open_message(decode_record(unwrap_ndef(frame.payload)));
    } catch (const Error& e) {
      reject(link, NakStage::Channel, e.code());
      return;
    }
    trace_.accepted_plaintexts.push_back(encode_plain(msg));
    link.log_event(Side::Device, "accepted:" + std::string(message_type_name(msg.type)));

    MessageType reply_type = MessageType::Error;
    Bytes reply;
    try {
      switch (msg.type) {
        case MessageType::ReadStatus:
          reply = device_.read_status(link.now());
          reply_type = MessageType::StatusData;
          break;
        case MessageType::UpdateConfig: {
          if (session_->mode() != SessionMode::ReadWrite) fail(ErrorCode::WriteNotPermitted);
          if (msg.data.size() < 2) fail(ErrorCode::TruncatedPayload, "config update");
          config_deliveries_.push_back(session_->mode());
          const auto version = device_.apply_config(link.now(), get_be16(msg.data, 0),
                                                    ByteView{msg.data}.subspan(2));
          put_be32(reply, version);
          reply_type = MessageType::Ack;
          break;
        }
        default:
          fail(ErrorCode::UnknownMessageType, "device only serves requests");
      }
    } catch (const Error& e) {
      link.log_event(Side::Device, "request_error:" + std::string(to_string(e.code())));
      reply = {static_cast<std::uint8_t>(e.code())};
      reply_type = MessageType::Error;
    }
    PlainMessage sealed;
    SndefRecord rec = session_->seal_message(reply_type, reply, rng_, &sealed);
    trace_.sent_plaintexts.push_back(encode_plain(sealed));
    link.transmit(Side::Device, Frame{FrameType::Data, wrap_ndef(encode_record(rec)), 0});
  }

  BmsDevice& device_;
  DeviceAuthenticator auth_;
  crypto::SeededEntropy rng_;
  std::optional<Session> session_;
  CipherSuite pending_suite_ = CipherSuite::CbcCmac;
  SessionMode pending_mode_ = SessionMode::ReadOnly;
  ChannelTrace trace_;
  std::vector<SessionMode> config_deliveries_;
};

}  // namespace snfc
