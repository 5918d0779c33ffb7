// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

// snfc: run secure NFC readouts, attack scenarios and the crypto benchmark
// against a simulated BMS device.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "snfc/snfc.hpp"

namespace {

using namespace snfc;

struct CommonOptions {
  std::vector<std::string> fixtures;
  std::string suite = "cbc-cmac";
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::uint64_t latency = kDefaultLinkLatencyMs;
  std::size_t requests = 1;
  std::string json_out;
  std::string audit_out;
  std::string update;
  bool quiet = false;
};

struct AdversaryOptions {
  std::string kind = "none";
  std::size_t bit = 37;
  std::size_t frame_index = 0;
  std::string target_suite = "cbc-cmac";
  double drop_prob = 1.0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--fixture", o.fixtures, "Pack / identity fixture file (repeatable, later wins)");
  cmd->add_option("--suite", o.suite, "Cipher suite")
      ->check(CLI::IsMember({"cbc-cmac", "gcm", "ccm", "eax"}));
  cmd->add_option("--scenario", o.scenario, "Power scenario (overrides the fixture)")
      ->check(CLI::IsMember({"active", "on-rest"}));
  cmd->add_option("--seed", o.seed, "RNG seed; fixed seeds give reproducible reports");
  cmd->add_option("--latency", o.latency, "Simulated one-way link latency in ms");
  cmd->add_option("--requests", o.requests, "Number of READ_STATUS requests")->check(CLI::Range(1, 1000));
  cmd->add_option("--update", o.update, "Send UPDATE_CONFIG KEY=HEXVALUE (opens a read-write session)");
  cmd->add_option("--json-out", o.json_out, "Write the JSON report here ('-' for stdout)");
  cmd->add_option("--audit-out", o.audit_out, "Write the line-delimited JSON audit log here");
  cmd->add_flag("--quiet", o.quiet, "Only print the outcome line");
}

void add_adversary(CLI::App* cmd, AdversaryOptions& a) {
  cmd->add_option("--bit", a.bit, "Tamper: bit offset inside the SNDEF record");
  cmd->add_option("--frame-index", a.frame_index, "Tamper/replay: index among DATA frames");
  cmd->add_option("--target-suite", a.target_suite, "Downgrade: suite byte written by the attacker")
      ->check(CLI::IsMember({"cbc-cmac", "gcm", "ccm", "eax"}));
  cmd->add_option("--drop-prob", a.drop_prob, "Drop: per-frame drop probability")->check(CLI::Range(0.0, 1.0));
}

Fixture load_fixtures(const std::vector<std::string>& paths) {
  Fixture fx;
  for (const auto& p : paths) load_fixture_file(fx, p);
  return fx;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  crypto::SystemEntropy sys;
  std::uint64_t s = 0;
  sys.fill(std::span<std::uint8_t>(reinterpret_cast<std::uint8_t*>(&s), sizeof s));
  return s;
}

ReadoutOptions make_options(const CommonOptions& o) {
  ReadoutOptions opt;
  opt.suite = *parse_suite(o.suite);
  if (o.scenario == "active") opt.scenario = PowerScenario::Active;
  if (o.scenario == "on-rest") opt.scenario = PowerScenario::OnRest;
  opt.seed = resolve_seed(o.seed);
  opt.latency_ms = o.latency;
  opt.requests.assign(o.requests, Request{});
  if (!o.update.empty()) {
    const auto eq = o.update.find('=');
    auto key = from_hex(o.update.substr(0, eq));
    auto value = eq == std::string::npos ? std::nullopt : from_hex(o.update.substr(eq + 1));
    if (!key || key->size() != 2 || !value) {
      throw CLI::ValidationError("--update", "expected KEY=HEX with a 4-digit hex key");
    }
    Bytes data = *key;
    append(data, *value);
    opt.requests.push_back(Request{MessageType::UpdateConfig, data});
    opt.mode = SessionMode::ReadWrite;
  }
  return opt;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << text;
}

void emit(const ScenarioReport& report, const CommonOptions& o) {
  std::printf("%s: %s", report.name.c_str(), std::string(outcome_name(report.outcome())).c_str());
  if (report.reader.error) std::printf(" (%s)", std::string(to_string(*report.reader.error)).c_str());
  if (report.attack) {
    std::printf(" | attack %s, countermeasure: %s", report.contained ? "contained" : "SUCCEEDED",
                report.countermeasure.c_str());
  }
  std::printf(" | exit %d\n", report.exit_code());
  if (!o.quiet) {
    std::printf("  suite %s, %s scenario, seed %llu, %d auth attempt(s)\n",
                std::string(suite_name(report.suite)).c_str(),
                std::string(power_scenario_name(report.power)).c_str(),
                static_cast<unsigned long long>(report.seed), report.reader.auth_attempts);
    std::printf("  simulated: auth %llu ms, transmission %llu ms | wall clock: auth %.3f ms, transmission %.3f ms\n",
                static_cast<unsigned long long>(report.auth_ms),
                static_cast<unsigned long long>(report.transmission_ms), report.reader.wall_auth_ms,
                report.reader.wall_transmission_ms);
    if (const auto& s = report.reader.status) {
      std::printf("  cells [mV]:");
      for (auto v : s->cell_mv) std::printf(" %u", v);
      std::printf("\n  temps [0.1 C]:");
      for (auto t : s->temps_dc) std::printf(" %d", t);
      std::printf("\n  SoH %u%%, cycles %u, faults 0x%04x, lifetime min %u mV, lifetime max %d (0.1 C)\n",
                  s->state_of_health, s->cycle_count, s->fault_flags, s->lifetime_min_mv,
                  s->lifetime_max_temp_dc);
    }
    if (report.reader.config_version) std::printf("  config version %u\n", *report.reader.config_version);
    if (report.attack) {
      std::printf("  witness: leak matches %zu, accepted modified %zu, duplicates accepted %zu\n",
                  report.witness.plaintext_leak_matches, report.witness.accepted_modified,
                  report.witness.duplicate_accepted);
    }
  }
  if (!o.json_out.empty()) write_text(o.json_out, report.to_json().dump(2) + "\n");
  if (!o.audit_out.empty()) write_text(o.audit_out, report.log.to_jsonl());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure NFC readout of a simulated battery management system"};
  app.require_subcommand(1);

  CommonOptions readout_opts;
  AdversaryOptions readout_adv;
  bool wrong_key = false, no_field = false;
  auto* readout = app.add_subcommand("readout", "Authenticate and read the pack status");
  add_common(readout, readout_opts);
  add_adversary(readout, readout_adv);
  readout->add_option("--adversary", readout_adv.kind, "Adversary on the link")
      ->check(CLI::IsMember({"none", "eavesdrop", "tamper", "replay", "downgrade", "drop"}));
  readout->add_flag("--wrong-key", wrong_key, "Provision the device with a different master key");
  readout->add_flag("--no-field", no_field, "Never raise the reader field");

  CommonOptions attack_opts;
  AdversaryOptions attack_adv;
  auto* attack = app.add_subcommand("attack", "Run an attack scenario; exit 0 iff contained");
  attack->add_option("kind", attack_adv.kind, "Attack")
      ->required()
      ->check(CLI::IsMember({"eavesdrop", "tamper", "replay", "downgrade", "drop"}));
  add_common(attack, attack_opts);
  add_adversary(attack, attack_adv);

  std::size_t payload = bench::kDefaultPayload, iterations = bench::kDefaultIterations;
  std::string bench_json;
  auto* bench_cmd = app.add_subcommand("bench", "Time the handshake and seal+unseal per suite");
  bench_cmd->add_option("--payload", payload, "Bytes of secret data")->check(CLI::Range(std::size_t{0}, bench::kMaxBenchPayload));
  bench_cmd->add_option("--iterations", iterations, "Samples per phase")->check(CLI::Range(std::size_t{1}, std::size_t{10000000}));
  bench_cmd->add_option("--json-out", bench_json, "Write the JSON report here ('-' for stdout)");

  std::string serial_hex, keygen_out;
  std::optional<std::uint64_t> keygen_seed;
  auto* keygen = app.add_subcommand("keygen", "Write a device identity fixture with a fresh master key");
  keygen->add_option("--serial", serial_hex, "Device serial, 16 hex digits")->required();
  keygen->add_option("--out", keygen_out, "Output fixture path ('-' for stdout)")->required();
  keygen->add_option("--seed", keygen_seed, "Deterministic key (testing only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code::kUsage;
  }

  try {
    if (*readout) {
      ReadoutOptions opt = make_options(readout_opts);
      opt.wrong_key = wrong_key;
      opt.raise_field = !no_field;
      const auto kind = *parse_adversary(readout_adv.kind);
      if (kind != AdversaryKind::None) {
        AdversaryConfig adv;
        adv.kind = kind;
        adv.bit_offset = readout_adv.bit;
        adv.frame_index = readout_adv.frame_index;
        adv.target_suite = static_cast<std::uint8_t>(*parse_suite(readout_adv.target_suite));
        adv.drop_probability = readout_adv.drop_prob;
        opt.adversaries.push_back(adv);
      }
      const auto report = run_readout(load_fixtures(readout_opts.fixtures), opt);
      emit(report, readout_opts);
      return report.exit_code();
    }
    if (*attack) {
      const auto kind = *parse_adversary(attack_adv.kind);
      if (kind == AdversaryKind::Downgrade && attack->count("--suite") == 0) attack_opts.suite = "gcm";
      ReadoutOptions opt = make_options(attack_opts);
      AttackParams params;
      params.bit_offset = attack_adv.bit;
      params.frame_index = attack_adv.frame_index;
      params.downgrade_target = *parse_suite(attack_adv.target_suite);
      params.drop_probability = attack_adv.drop_prob;
      const auto report = run_attack(load_fixtures(attack_opts.fixtures), kind, params, opt);
      emit(report, attack_opts);
      return report.exit_code();
    }
    if (*bench_cmd) {
      const auto report = bench::run(payload, iterations);
      std::cout << report.to_table();
      if (!bench_json.empty()) write_text(bench_json, report.to_json().dump(2) + "\n");
      return exit_code::kSuccess;
    }
    if (*keygen) {
      const auto serial = from_hex(serial_hex);
      if (!serial || serial->size() != 8) {
        std::cerr << "keygen: --serial must be 16 hex digits\n";
        return exit_code::kUsage;
      }
      Block key{};
      if (keygen_seed) {
        crypto::SeededEntropy(*keygen_seed).fill(key);
      } else {
        crypto::SystemEntropy().fill(key);
      }
      write_text(keygen_out, identity_fixture_text(to_array<8>(*serial), key));
      secure_zero(key);
      if (keygen_out != "-") std::printf("wrote identity fixture %s\n", keygen_out.c_str());
      return exit_code::kSuccess;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return exit_code::kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::IoError) return 74;
    return e.code() == ErrorCode::FixtureError ? exit_code::kUsage : 1;
  }
  return exit_code::kUsage;
}
