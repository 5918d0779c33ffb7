// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

// Discrete-event NFC link between a reader and a tag/device endpoint, with
// field power semantics and an adversary pipeline sitting on the air
// interface. Everything runs on a simulated millisecond clock so identical
// inputs produce identical audit logs.

#pragma once

#include <functional>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "snfc/bytes.hpp"
#include "snfc/codec.hpp"
#include "snfc/device.hpp"
#include "snfc/error.hpp"

namespace snfc {

enum class FrameType : std::uint8_t { Auth1, Auth2, Auth3, Data, Nak };

constexpr std::string_view frame_type_name(FrameType t) noexcept {
  switch (t) {
    case FrameType::Auth1: return "AUTH1";
    case FrameType::Auth2: return "AUTH2";
    case FrameType::Auth3: return "AUTH3";
    case FrameType::Data: return "DATA";
    case FrameType::Nak: return "NAK";
  }
  return "UNKNOWN";
}

struct Frame {
  FrameType type = FrameType::Data;
  Bytes payload;
  SimTime timestamp = 0;
};

enum class Side { Reader, Device };

constexpr Side peer_of(Side s) noexcept { return s == Side::Reader ? Side::Device : Side::Reader; }
constexpr std::string_view side_name(Side s) noexcept {
  return s == Side::Reader ? "reader" : "device";
}
constexpr std::string_view direction_name(Side from) noexcept {
  return from == Side::Reader ? "reader->device" : "device->reader";
}

// ---------------------------------------------------------------------------
// Audit log

struct AuditEntry {
  SimTime tick = 0;
  std::string direction;  // "reader->device", "device->reader", "reader", "device", "link"
  std::optional<std::string> frame_type;
  std::optional<std::string> payload_hex;
  std::optional<std::string> adversary_action;
  std::optional<std::string> endpoint_event;

  nlohmann::ordered_json to_json() const {
    auto opt = [](const std::optional<std::string>& v) -> nlohmann::ordered_json {
      return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    return nlohmann::ordered_json{{"tick", tick},
                                  {"direction", direction},
                                  {"frame_type", opt(frame_type)},
                                  {"payload_hex", opt(payload_hex)},
                                  {"adversary_action", opt(adversary_action)},
                                  {"endpoint_event", opt(endpoint_event)}};
  }
};

class AuditLog {
 public:
  void push(AuditEntry e) { entries_.push_back(std::move(e)); }
  const std::vector<AuditEntry>& entries() const noexcept { return entries_; }

  /// Line-delimited JSON, one entry per line.
  std::string to_jsonl() const {
    std::string out;
    for (const auto& e : entries_) {
      out += e.to_json().dump();
      out += '\n';
    }
    return out;
  }

  /// Frames as sent by endpoints (before any adversary action).
  std::vector<const AuditEntry*> sent_frames() const {
    std::vector<const AuditEntry*> out;
    for (const auto& e : entries_) {
      if (e.frame_type && !e.adversary_action && !e.endpoint_event) out.push_back(&e);
    }
    return out;
  }

  bool has_event(std::string_view needle) const {
    for (const auto& e : entries_) {
      if (e.endpoint_event && e.endpoint_event->find(needle) != std::string::npos) return true;
    }
    return false;
  }

 private:
  std::vector<AuditEntry> entries_;
};

// ---------------------------------------------------------------------------
// Adversaries

enum class AdversaryKind { None, Eavesdrop, TamperBit, Replay, Downgrade, Drop };

constexpr std::string_view adversary_name(AdversaryKind k) noexcept {
  switch (k) {
    case AdversaryKind::None: return "none";
    case AdversaryKind::Eavesdrop: return "eavesdrop";
    case AdversaryKind::TamperBit: return "tamper";
    case AdversaryKind::Replay: return "replay";
    case AdversaryKind::Downgrade: return "downgrade";
    case AdversaryKind::Drop: return "drop";
  }
  return "unknown";
}

inline std::optional<AdversaryKind> parse_adversary(std::string_view name) {
  for (auto k : {AdversaryKind::None, AdversaryKind::Eavesdrop, AdversaryKind::TamperBit,
                 AdversaryKind::Replay, AdversaryKind::Downgrade, AdversaryKind::Drop}) {
    if (adversary_name(k) == name) return k;
  }
  return std::nullopt;
}

struct AdversaryConfig {
  AdversaryKind kind = AdversaryKind::None;
  std::size_t bit_offset = 0;    // TamperBit: bit within the SNDEF record
  std::size_t frame_index = 0;   // TamperBit / Replay: index among DATA frames
  std::uint8_t target_suite = static_cast<std::uint8_t>(CipherSuite::CbcCmac);  // Downgrade
  double drop_probability = 1.0;  // Drop
};

/// One stage of the man-in-the-middle pipeline. `intercept` returns the
/// frames that continue towards the receiver, in delivery order.
class Adversary {
 public:
  Adversary(AdversaryConfig config, std::uint64_t seed) : config_(config), rng_(seed) {}

  const AdversaryConfig& config() const noexcept { return config_; }
  const std::vector<Frame>& captured() const noexcept { return captured_; }

  std::vector<Frame> intercept(Side from, Frame frame, std::string& action) {
    (void)from;
    const bool is_data = frame.type == FrameType::Data;
    const std::size_t data_index = is_data ? data_seen_++ : 0;
    switch (config_.kind) {
      case AdversaryKind::None:
        return {std::move(frame)};
      case AdversaryKind::Eavesdrop:
        captured_.push_back(frame);
        action = "eavesdrop:capture";
        return {std::move(frame)};
      case AdversaryKind::TamperBit: {
        if (!is_data || data_index != config_.frame_index) return {std::move(frame)};
        const std::size_t bit = kNdefEnvelopeLength * 8 + config_.bit_offset;
        if (bit / 8 >= frame.payload.size()) {
          action = "tamper_bit:out_of_range";
          return {std::move(frame)};
        }
        frame.payload[bit / 8] ^= static_cast<std::uint8_t>(0x80 >> (bit % 8));
        action = "tamper_bit:" + std::to_string(config_.bit_offset);
        return {std::move(frame)};
      }
      case AdversaryKind::Replay: {
        if (!is_data || data_index != config_.frame_index) return {std::move(frame)};
        action = "replay:frame=" + std::to_string(data_index);
        Frame copy = frame;
        return {std::move(frame), std::move(copy)};
      }
      case AdversaryKind::Downgrade: {
        std::size_t at = 0;
        if (is_data) {
          at = kNdefEnvelopeLength;
        } else if (frame.type == FrameType::Auth1) {
          at = 16;
        } else {
          return {std::move(frame)};
        }
        if (at >= frame.payload.size() || frame.payload[at] == config_.target_suite) {
          return {std::move(frame)};
        }
        action = "downgrade:" + to_hex(ByteView{&frame.payload[at], 1}) + "->" +
                 to_hex(ByteView{&config_.target_suite, 1});
        frame.payload[at] = config_.target_suite;
        return {std::move(frame)};
      }
      case AdversaryKind::Drop: {
        if (std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < config_.drop_probability) {
          action = "drop";
          return {};
        }
        return {std::move(frame)};
      }
    }
    return {std::move(frame)};
  }

 private:
  AdversaryConfig config_;
  std::mt19937_64 rng_;
  std::size_t data_seen_ = 0;
  std::vector<Frame> captured_;
};

// ---------------------------------------------------------------------------
// Link

class Link;

/// Callbacks invoked by the link's event loop.
class LinkEndpoint {
 public:
  virtual ~LinkEndpoint() = default;
  virtual void on_start(Link&) {}
  virtual void on_frame(Link&, const Frame&) = 0;
  virtual void on_timer(Link&, std::uint64_t /*id*/) {}
  virtual void on_field(Link&, bool /*on*/) {}
  virtual bool powered(SimTime /*now*/) const { return true; }
};

inline constexpr std::size_t kDefaultMaxEvents = 100000;

class Link {
 public:
  explicit Link(SimTime latency_ms, std::vector<AdversaryConfig> adversaries = {},
                std::uint64_t seed = 0, std::size_t max_events = kDefaultMaxEvents)
      : latency_(latency_ms), max_events_(max_events) {
    std::uint64_t k = 0;
    for (const auto& cfg : adversaries) {
      if (cfg.kind != AdversaryKind::None) adversaries_.emplace_back(cfg, seed + 0x9E37u * ++k);
    }
  }

  Link(const Link&) = delete;
  Link& operator=(const Link&) = delete;

  void attach(Side side, LinkEndpoint& endpoint) { endpoint_(side) = &endpoint; }

  SimTime now() const noexcept { return now_; }
  SimTime latency() const noexcept { return latency_; }
  bool field() const noexcept { return field_; }
  const AuditLog& log() const noexcept { return log_; }
  const std::vector<Adversary>& adversaries() const noexcept { return adversaries_; }

  /// Sends a frame from `from`. It passes the adversary pipeline and reaches
  /// the peer `latency` ms later, unless the field drops in between.
  void transmit(Side from, Frame frame) {
    if (frame.payload.size() > kMailboxCapacity) {
      fail(ErrorCode::FrameTooLarge, std::to_string(frame.payload.size()) + " bytes");
    }
    if (auto* ep = endpoint_(from); ep && !ep->powered(now_)) {
      fail(ErrorCode::EndpointUnpowered, std::string(side_name(from)));
    }
    frame.timestamp = now_;
    log_.push({now_, std::string(direction_name(from)), std::string(frame_type_name(frame.type)),
               to_hex(frame.payload), std::nullopt, std::nullopt});

    std::vector<Frame> in_flight{std::move(frame)};
    for (auto& adv : adversaries_) {
      std::vector<Frame> next;
      for (auto& f : in_flight) {
        std::string action;
        auto out = adv.intercept(from, std::move(f), action);
        if (!action.empty()) {
          if (out.empty()) {
            log_.push({now_, std::string(direction_name(from)), std::nullopt, std::nullopt, action,
                       std::nullopt});
          }
          for (const auto& o : out) {
            log_.push({now_, std::string(direction_name(from)),
                       std::string(frame_type_name(o.type)), to_hex(o.payload), action,
                       std::nullopt});
          }
        }
        for (auto& o : out) next.push_back(std::move(o));
      }
      in_flight = std::move(next);
    }
    for (auto& f : in_flight) {
      Event ev;
      ev.kind = EventKind::Deliver;
      ev.target = peer_of(from);
      ev.frame = std::move(f);
      ev.field_epoch = field_epoch_;
      schedule(now_ + latency_, std::move(ev));
    }
  }

  /// Raises or drops the reader's RF field. Dropping it discards frames in
  /// flight and notifies both endpoints.
  void field_set(bool on) {
    if (on == field_) return;
    field_ = on;
    if (!on) ++field_epoch_;
    log_event_raw("link", on ? "field_on" : "field_off");
    for (auto side : {Side::Device, Side::Reader}) {
      if (auto* ep = endpoint_(side)) ep->on_field(*this, on);
    }
  }

  void set_timer(Side side, SimTime delay, std::uint64_t id) {
    Event ev;
    ev.kind = EventKind::Timer;
    ev.target = side;
    ev.timer_id = id;
    schedule(now_ + delay, std::move(ev));
  }

  void log_event(Side side, std::string event) {
    log_event_raw(std::string(side_name(side)), std::move(event));
  }

  /// Runs the event queue to quiescence.
  const AuditLog& run_until_idle() {
    if (!started_) {
      started_ = true;
      for (auto side : {Side::Device, Side::Reader}) {
        Event ev;
        ev.kind = EventKind::Start;
        ev.target = side;
        schedule(now_, std::move(ev));
      }
    }
    std::size_t processed = 0;
    while (!queue_.empty()) {
      if (++processed > max_events_) {
        log_event_raw("link", "livelock");
        fail(ErrorCode::LivelockDetected, std::to_string(max_events_) + " events");
      }
      Event ev = queue_.top().event;
      now_ = queue_.top().at;
      queue_.pop();
      LinkEndpoint* ep = endpoint_(ev.target);
      if (!ep) continue;
      switch (ev.kind) {
        case EventKind::Start:
          ep->on_start(*this);
          break;
        case EventKind::Timer:
          ep->on_timer(*this, ev.timer_id);
          break;
        case EventKind::Deliver:
          if (ev.field_epoch != field_epoch_ || !field_) {
            log_event_raw("link", "dropped:no_field");
          } else if (!ep->powered(now_)) {
            log_event_raw(std::string(side_name(ev.target)), "dropped:unpowered");
          } else {
            ep->on_frame(*this, ev.frame);
          }
          break;
      }
    }
    return log_;
  }

 private:
  enum class EventKind { Start, Timer, Deliver };
  struct Event {
    EventKind kind = EventKind::Start;
    Side target = Side::Reader;
    Frame frame;
    std::uint64_t timer_id = 0;
    std::uint64_t field_epoch = 0;
  };
  struct Scheduled {
    SimTime at;
    std::uint64_t seq;
    Event event;
    bool operator>(const Scheduled& o) const noexcept {
      return at != o.at ? at > o.at : seq > o.seq;
    }
  };

  LinkEndpoint*& endpoint_(Side s) noexcept { return s == Side::Reader ? reader_ : device_; }
  LinkEndpoint* endpoint_(Side s) const noexcept { return s == Side::Reader ? reader_ : device_; }

  void schedule(SimTime at, Event ev) { queue_.push({at, seq_++, std::move(ev)}); }

  void log_event_raw(std::string who, std::string event) {
    log_.push({now_, std::move(who), std::nullopt, std::nullopt, std::nullopt, std::move(event)});
  }

  SimTime latency_;
  std::size_t max_events_;
  std::vector<Adversary> adversaries_;
  LinkEndpoint* reader_ = nullptr;
  LinkEndpoint* device_ = nullptr;
  std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  SimTime now_ = 0;
  bool field_ = false;
  std::uint64_t field_epoch_ = 0;
  bool started_ = false;
  AuditLog log_;
};

}  // namespace snfc
