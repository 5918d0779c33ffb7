// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

// Simulated battery pack and BMS processing unit.
//
// STATUS_DATA payload (big-endian):
//   [n_cells:1][cell_mv:2*N][n_temps:1][temp_dC:2*M signed][soh:1]
//   [cycle_count:4][fault_flags:2][lifetime_min_mv:2][lifetime_max_temp_dC:2]

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "snfc/bytes.hpp"
#include "snfc/codec.hpp"
#include "snfc/error.hpp"

namespace snfc {

using SimTime = std::uint64_t;  // simulated milliseconds

enum class PowerScenario { Active, OnRest };

constexpr std::string_view power_scenario_name(PowerScenario s) noexcept {
  return s == PowerScenario::Active ? "active" : "on-rest";
}

namespace fault {
inline constexpr std::uint16_t kOverTemp = 0x0001;
inline constexpr std::uint16_t kUnderVoltage = 0x0002;
inline constexpr std::uint16_t kCommsFault = 0x0004;
}  // namespace fault

inline constexpr std::size_t kMinCells = 6, kMaxCells = 14;
inline constexpr std::size_t kMinProbes = 2, kMaxProbes = 4;
inline constexpr std::uint16_t kMaxCellMillivolts = 5000;
inline constexpr std::int16_t kMinTemperature = -400, kMaxTemperature = 1500;

struct BatteryPackState {
  std::vector<std::uint16_t> cell_mv;
  std::vector<std::int16_t> temps_dc;  // 0.1 degC
  std::uint8_t state_of_health = 100;
  std::uint32_t cycle_count = 0;
  std::uint16_t fault_flags = 0;
  std::uint16_t lifetime_min_mv = kMaxCellMillivolts;
  std::int16_t lifetime_max_temp_dc = kMinTemperature;

  bool operator==(const BatteryPackState&) const = default;
};

inline void validate_pack(const BatteryPackState& s) {
  if (s.cell_mv.size() < kMinCells || s.cell_mv.size() > kMaxCells) {
    fail(ErrorCode::ValueOutOfRange, "cell count must be 6..14");
  }
  if (s.temps_dc.size() < kMinProbes || s.temps_dc.size() > kMaxProbes) {
    fail(ErrorCode::ValueOutOfRange, "probe count must be 2..4");
  }
  if (s.state_of_health > 100) fail(ErrorCode::ValueOutOfRange, "state of health");
  for (auto mv : s.cell_mv) {
    if (mv > kMaxCellMillivolts) fail(ErrorCode::ValueOutOfRange, "cell voltage");
  }
  for (auto t : s.temps_dc) {
    if (t < kMinTemperature || t > kMaxTemperature) fail(ErrorCode::ValueOutOfRange, "temperature");
  }
  if (s.lifetime_min_mv > kMaxCellMillivolts ||
      s.lifetime_max_temp_dc < kMinTemperature || s.lifetime_max_temp_dc > kMaxTemperature) {
    fail(ErrorCode::ValueOutOfRange, "lifetime envelope");
  }
}

inline std::size_t status_length(std::size_t cells, std::size_t probes) {
  return 1 + 2 * cells + 1 + 2 * probes + 1 + 4 + 2 + 2 + 2;
}

inline Bytes encode_status(const BatteryPackState& s) {
  Bytes out;
  out.reserve(status_length(s.cell_mv.size(), s.temps_dc.size()));
  out.push_back(static_cast<std::uint8_t>(s.cell_mv.size()));
  for (auto mv : s.cell_mv) put_be16(out, mv);
  out.push_back(static_cast<std::uint8_t>(s.temps_dc.size()));
  for (auto t : s.temps_dc) put_be16(out, static_cast<std::uint16_t>(t));
  out.push_back(s.state_of_health);
  put_be32(out, s.cycle_count);
  put_be16(out, s.fault_flags);
  put_be16(out, s.lifetime_min_mv);
  put_be16(out, static_cast<std::uint16_t>(s.lifetime_max_temp_dc));
  return out;
}

/// Reader-side parser for STATUS_DATA payloads.
inline BatteryPackState parse_status(ByteView in) {
  if (in.empty()) fail(ErrorCode::TruncatedPayload, "status");
  const std::size_t cells = in[0];
  if (in.size() < 1 + 2 * cells + 1) fail(ErrorCode::TruncatedPayload, "status");
  const std::size_t probes = in[1 + 2 * cells];
  if (in.size() != status_length(cells, probes)) fail(ErrorCode::LengthMismatch, "status");
  BatteryPackState s;
  std::size_t at = 1;
  for (std::size_t i = 0; i < cells; ++i, at += 2) s.cell_mv.push_back(get_be16(in, at));
  ++at;
  for (std::size_t i = 0; i < probes; ++i, at += 2) {
    s.temps_dc.push_back(static_cast<std::int16_t>(get_be16(in, at)));
  }
  s.state_of_health = in[at++];
  s.cycle_count = get_be32(in, at);
  at += 4;
  s.fault_flags = get_be16(in, at);
  s.lifetime_min_mv = get_be16(in, at + 2);
  s.lifetime_max_temp_dc = static_cast<std::int16_t>(get_be16(in, at + 4));
  validate_pack(s);
  return s;
}

namespace config_key {
inline constexpr std::uint16_t kOverTempThreshold = 0x0001;     // int16, 0.1 degC
inline constexpr std::uint16_t kUnderVoltageThreshold = 0x0002; // uint16, mV
inline constexpr std::uint16_t kBalancingThreshold = 0x0003;    // uint16, mV
inline constexpr std::uint16_t kAssetTag = 0x0010;              // free-form
}  // namespace config_key

inline constexpr std::size_t kMaxConfigValue = 64;

/// Configuration with a write whitelist. version counts accepted updates.
class ConfigStore {
 public:
  ConfigStore() {
    entries_[config_key::kOverTempThreshold] = be16(600);
    entries_[config_key::kUnderVoltageThreshold] = be16(2800);
    entries_[config_key::kBalancingThreshold] = be16(30);
    entries_[config_key::kAssetTag] = {};
  }

  static bool is_allowed(std::uint16_t key) noexcept {
    return key == config_key::kOverTempThreshold || key == config_key::kUnderVoltageThreshold ||
           key == config_key::kBalancingThreshold || key == config_key::kAssetTag;
  }

  std::uint32_t apply(std::uint16_t key, ByteView value) {
    if (value.size() > kMaxConfigValue) fail(ErrorCode::ValueTooLong, "config value > 64 bytes");
    if (!is_allowed(key)) fail(ErrorCode::UnknownConfigKey, "key outside the write whitelist");
    if (key != config_key::kAssetTag && value.size() != 2) {
      fail(ErrorCode::ValueOutOfRange, "threshold values are 2 bytes");
    }
    entries_[key] = Bytes(value.begin(), value.end());
    return ++version_;
  }

  std::uint32_t version() const noexcept { return version_; }
  const Bytes& get(std::uint16_t key) const { return entries_.at(key); }

  std::int16_t over_temp_threshold() const {
    return static_cast<std::int16_t>(get_be16(get(config_key::kOverTempThreshold), 0));
  }
  std::uint16_t under_voltage_threshold() const {
    return get_be16(get(config_key::kUnderVoltageThreshold), 0);
  }

 private:
  static Bytes be16(std::uint16_t v) {
    Bytes b;
    put_be16(b, v);
    return b;
  }

  std::map<std::uint16_t, Bytes> entries_;
  std::uint32_t version_ = 0;
};

inline constexpr SimTime kDefaultWakeLatencyMs = 20;

class BmsDevice {
 public:
  BmsDevice(BatteryPackState initial, PowerScenario scenario,
            SimTime wake_latency = kDefaultWakeLatencyMs)
      : state_(std::move(initial)), scenario_(scenario), wake_latency_(wake_latency) {
    validate_pack(state_);
    comms_fault_ = (state_.fault_flags & fault::kCommsFault) != 0;
    for (auto mv : state_.cell_mv) state_.lifetime_min_mv = std::min(state_.lifetime_min_mv, mv);
    for (auto t : state_.temps_dc) {
      state_.lifetime_max_temp_dc = std::max(state_.lifetime_max_temp_dc, t);
    }
    recompute_faults();
  }

  PowerScenario scenario() const noexcept { return scenario_; }
  SimTime wake_latency() const noexcept { return wake_latency_; }
  const BatteryPackState& state() const noexcept { return state_; }
  const ConfigStore& config() const noexcept { return config_; }

  /// In On-Rest the MCU runs only from the harvested field, after the wake
  /// latency has elapsed.
  bool powered(SimTime now) const noexcept {
    if (scenario_ == PowerScenario::Active) return true;
    return wake_at_.has_value() && now >= *wake_at_;
  }

  /// Field-on event. No effect when already powered or waking.
  void wake_up(SimTime now) {
    if (scenario_ == PowerScenario::Active || wake_at_) return;
    wake_at_ = now + wake_latency_;
  }

  /// Field-off event: an On-Rest device loses power immediately.
  void field_lost() noexcept {
    if (scenario_ == PowerScenario::OnRest) wake_at_.reset();
  }

  Bytes read_status(SimTime now) const {
    if (!powered(now)) fail(ErrorCode::DeviceUnpowered);
    return encode_status(state_);
  }

  /// Returns the new configuration version.
  std::uint32_t apply_config(SimTime now, std::uint16_t key, ByteView value) {
    if (!powered(now)) fail(ErrorCode::DeviceUnpowered);
    const auto version = config_.apply(key, value);
    recompute_faults();
    return version;
  }

  void inject_measurement(std::size_t cell, std::uint16_t millivolts) {
    if (cell >= state_.cell_mv.size()) fail(ErrorCode::IndexOutOfRange, "cell index");
    if (millivolts > kMaxCellMillivolts) fail(ErrorCode::ValueOutOfRange, "cell voltage");
    state_.cell_mv[cell] = millivolts;
    state_.lifetime_min_mv = std::min(state_.lifetime_min_mv, millivolts);
    recompute_faults();
  }

  void inject_temperature(std::size_t probe, std::int16_t deci_celsius) {
    if (probe >= state_.temps_dc.size()) fail(ErrorCode::IndexOutOfRange, "probe index");
    if (deci_celsius < kMinTemperature || deci_celsius > kMaxTemperature) {
      fail(ErrorCode::ValueOutOfRange, "temperature");
    }
    state_.temps_dc[probe] = deci_celsius;
    state_.lifetime_max_temp_dc = std::max(state_.lifetime_max_temp_dc, deci_celsius);
    recompute_faults();
  }

  void set_comms_fault(bool on) noexcept {
    comms_fault_ = on;
    recompute_faults();
  }

 private:
  void recompute_faults() {
    std::uint16_t flags = 0;
    const auto over = config_.over_temp_threshold();
    const auto under = config_.under_voltage_threshold();
    if (std::any_of(state_.temps_dc.begin(), state_.temps_dc.end(),
                    [&](std::int16_t t) { return t > over; })) {
      flags |= fault::kOverTemp;
    }
    if (std::any_of(state_.cell_mv.begin(), state_.cell_mv.end(),
                    [&](std::uint16_t v) { return v < under; })) {
      flags |= fault::kUnderVoltage;
    }
    if (comms_fault_) flags |= fault::kCommsFault;
    state_.fault_flags = flags;
  }

  BatteryPackState state_;
  PowerScenario scenario_;
  SimTime wake_latency_;
  std::optional<SimTime> wake_at_;
  ConfigStore config_;
  bool comms_fault_ = false;
};

}  // namespace snfc
