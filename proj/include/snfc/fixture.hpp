// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

// Declarative pack / identity fixtures: one `key = value` per line, `#`
// starts a comment. Recognised keys:
//
//   serial            16 hex digits (8 bytes)
//   master_key        32 hex digits (16 bytes)
//   dev_add_data      hex, defaults to the serial
//   cells             comma separated millivolts, 6..14 entries
//   temps             comma separated 0.1 degC, 2..4 entries
//   soh               0..100
//   cycles            cycle count
//   fault_flags       initial fault bitfield (only comms-fault is kept)
//   lifetime_min_mv   recorded minimum cell voltage
//   lifetime_max_temp recorded maximum temperature, 0.1 degC
//   scenario          active | on-rest
//   wake_latency_ms   simulated wake-up time
//
// Later files override earlier ones, so an identity fixture written by
// `keygen` can be combined with a pack fixture.

#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "snfc/auth.hpp"
#include "snfc/device.hpp"
#include "snfc/error.hpp"

namespace snfc {

struct Fixture {
  Serial serial{0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08};
  Block master_key{0x00, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07,
                   0x08, 0x09, 0x0a, 0x0b, 0x0c, 0x0d, 0x0e, 0x0f};
  std::optional<Bytes> dev_add_data;
  BatteryPackState pack{{3700, 3700, 3700, 3700, 3700, 3700}, {250, 250}, 83, 412, 0,
                        kMaxCellMillivolts, kMinTemperature};
  PowerScenario scenario = PowerScenario::Active;
  SimTime wake_latency_ms = kDefaultWakeLatencyMs;

  DeviceIdentity identity() const {
    MasterKey key{master_key};
    if (dev_add_data) return DeviceIdentity(serial, key, *dev_add_data);
    return DeviceIdentity(serial, key);
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) fail(ErrorCode::FixtureError, "bad number for " + key);
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(key, trim(item)));
  return out;
}

template <std::size_t N>
std::array<std::uint8_t, N> parse_hex_exact(const std::string& key, const std::string& text) {
  auto bytes = from_hex(text);
  if (!bytes || bytes->size() != N) {
    fail(ErrorCode::FixtureError, key + " must be " + std::to_string(2 * N) + " hex digits");
  }
  return to_array<N>(*bytes);
}

}  // namespace detail

inline void apply_fixture_text(Fixture& fx, std::string_view text) {
  std::stringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::FixtureError, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key == "serial") {
      fx.serial = detail::parse_hex_exact<8>(key, value);
    } else if (key == "master_key") {
      fx.master_key = detail::parse_hex_exact<16>(key, value);
    } else if (key == "dev_add_data") {
      auto bytes = from_hex(value);
      if (!bytes) fail(ErrorCode::FixtureError, "dev_add_data must be hex");
      fx.dev_add_data = *bytes;
    } else if (key == "cells") {
      fx.pack.cell_mv = detail::parse_list<std::uint16_t>(key, value);
    } else if (key == "temps") {
      fx.pack.temps_dc = detail::parse_list<std::int16_t>(key, value);
    } else if (key == "soh") {
      const auto soh = detail::parse_number<unsigned>(key, value);
      if (soh > 100) fail(ErrorCode::FixtureError, "soh must be 0..100");
      fx.pack.state_of_health = static_cast<std::uint8_t>(soh);
    } else if (key == "cycles") {
      fx.pack.cycle_count = detail::parse_number<std::uint32_t>(key, value);
    } else if (key == "fault_flags") {
      fx.pack.fault_flags = detail::parse_number<std::uint16_t>(key, value);
    } else if (key == "lifetime_min_mv") {
      fx.pack.lifetime_min_mv = detail::parse_number<std::uint16_t>(key, value);
    } else if (key == "lifetime_max_temp") {
      fx.pack.lifetime_max_temp_dc = detail::parse_number<std::int16_t>(key, value);
    } else if (key == "scenario") {
      if (value == "active") {
        fx.scenario = PowerScenario::Active;
      } else if (value == "on-rest") {
        fx.scenario = PowerScenario::OnRest;
      } else {
        fail(ErrorCode::FixtureError, "scenario must be active or on-rest");
      }
    } else if (key == "wake_latency_ms") {
      fx.wake_latency_ms = detail::parse_number<SimTime>(key, value);
    } else {
      fail(ErrorCode::FixtureError, "line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  try {
    validate_pack(fx.pack);
  } catch (const Error& e) {
    fail(ErrorCode::FixtureError, e.what());
  }
}

inline void load_fixture_file(Fixture& fx, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  apply_fixture_text(fx, buffer.str());
}

inline std::string identity_fixture_text(const Serial& serial, const Block& master_key) {
  return "# device identity\nserial = " + to_hex(serial) + "\nmaster_key = " + to_hex(master_key) +
         "\n";
}

}  // namespace snfc
