#pragma once

#include <spinsim/runner.hpp>

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace spinsim {

namespace detail {

using nlohmann::json;

inline const json& member(const json& j, const std::string& ctx, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(ctx + "." + key + ": missing required field");
  return *it;
}

inline double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

inline int as_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

inline std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

inline std::vector<double> as_number_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(as_number(v, where));
  return out;
}

}  // namespace detail

inline SpinSystem parse_system(const detail::json& j) {
  using detail::as_integer;
  using detail::as_number;
  using detail::as_number_list;
  if (!j.is_object()) throw ConfigError("system: expected an object");
  SpinSystem s;
  s.n_qubits = as_integer(detail::member(j, "system", "n"), "system.n");
  if (s.n_qubits < 1 || s.n_qubits > 6)
    throw ConfigError("system.n: supported register sizes are 1..6");
  const auto n = static_cast<size_t>(s.n_qubits);

  s.offsets.assign(n, 0.0);
  if (j.contains("offsets")) {
    s.offsets = as_number_list(j["offsets"], "system.offsets");
    if (s.offsets.size() != n) throw ConfigError("system.offsets: length must equal n");
  }

  s.couplings = Eigen::MatrixXd::Zero(s.n_qubits, s.n_qubits);
  if (j.contains("couplings")) {
    const auto& rows = j["couplings"];
    if (!rows.is_array() || rows.size() != n)
      throw ConfigError("system.couplings: expected an n-by-n matrix");
    for (size_t r = 0; r < n; ++r) {
      std::vector<double> row = as_number_list(rows[r], "system.couplings");
      if (row.size() != n) throw ConfigError("system.couplings: expected an n-by-n matrix");
      for (size_t c = 0; c < n; ++c) s.couplings(static_cast<int>(r), static_cast<int>(c)) = row[c];
    }
  }

  if (j.contains("t1")) {
    s.t1 = as_number_list(j["t1"], "system.t1");
    if (s.t1.size() != n) throw ConfigError("system.t1: length must equal n");
  }
  if (j.contains("t2")) {
    s.t2 = as_number_list(j["t2"], "system.t2");
    if (s.t2.size() != n) throw ConfigError("system.t2: length must equal n");
  }
  if (j.contains("eps")) {
    if (j["eps"].is_number())
      s.purity.assign(n, j["eps"].get<double>());
    else {
      s.purity = as_number_list(j["eps"], "system.eps");
      if (s.purity.size() != n) throw ConfigError("system.eps: length must equal n");
    }
  }
  return s;
}

inline Partition parse_partition(const std::string& text, int n_qubits) {
  const auto bar = text.find('|');
  if (bar == std::string::npos)
    throw ConfigError("discord: partition '" + text + "' must look like \"1|23\"");
  Partition p;
  auto read_sites = [&](const std::string& part, std::vector<int>& out) {
    for (char c : part) {
      if (c < '1' || c > '9')
        throw ConfigError("discord: bad site character in partition '" + text + "'");
      out.push_back(c - '0');
    }
  };
  read_sites(text.substr(0, bar), p.measured);
  read_sites(text.substr(bar + 1), p.rest);
  try {
    p.validate(n_qubits);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("discord: partition '" + text + "': " + e.what());
  }
  return p;
}

namespace detail {

inline DriveConfig parse_drive(const json& j, int n) {
  if (!j.is_object()) throw ConfigError("drive: expected an object");
  DriveConfig d;
  d.amplitudes = as_number_list(member(j, "drive", "amplitudes"), "drive.amplitudes");
  if (j.contains("phases"))
    d.phases = as_number_list(j["phases"], "drive.phases");
  else
    d.phases.assign(d.amplitudes.size(), 0.0);
  try {
    d.validate(n);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("drive: ") + e.what());
  }
  return d;
}

inline RfiDistribution parse_rfi(const json& j) {
  if (j.is_null()) return RfiDistribution::single();
  if (j.is_string()) {
    if (j.get<std::string>() == "default") return RfiDistribution::default_distribution();
    throw ConfigError("rfi: the only named distribution is \"default\"");
  }
  if (!j.is_object()) throw ConfigError("rfi: expected null, \"default\", or an object");
  std::vector<double> scales = as_number_list(member(j, "rfi", "scales"), "rfi.scales");
  std::vector<double> weights = as_number_list(member(j, "rfi", "weights"), "rfi.weights");
  if (scales.size() != weights.size())
    throw ConfigError("rfi: scales and weights must have equal length");
  RfiDistribution rfi;
  for (size_t k = 0; k < scales.size(); ++k) rfi.samples.push_back({scales[k], weights[k]});
  try {
    rfi.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("rfi: ") + e.what());
  }
  return rfi;
}

inline PulseElement parse_element(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::string type = as_string(member(j, where, "type"), where + ".type");
  if (type == "rotation") {
    const auto& sites_json = member(j, where, "sites");
    if (!sites_json.is_array()) throw ConfigError(where + ".sites: expected an array");
    std::vector<int> sites;
    for (const auto& s : sites_json) sites.push_back(as_integer(s, where + ".sites"));
    const double angle = as_number(member(j, where, "angle"), where + ".angle");
    const double phase = j.contains("phase") ? as_number(j["phase"], where + ".phase") : 0.0;
    return PulseElement::rotation(std::move(sites), angle, phase);
  }
  if (type == "delay")
    return PulseElement::delay(as_number(member(j, where, "duration"), where + ".duration"));
  if (type == "gradient") return PulseElement::gradient();
  throw ConfigError(where + ".type: expected rotation, delay, or gradient");
}

inline InitialSpec parse_initial(const json& j, int n) {
  InitialSpec init;
  init.state = std::string(static_cast<size_t>(n), 'g');
  if (j.is_null()) return init;
  if (!j.is_object()) throw ConfigError("initial: expected an object");
  if (j.contains("state")) init.state = as_string(j["state"], "initial.state");
  if (j.contains("eps")) init.eps = as_number(j["eps"], "initial.eps");
  if (j.contains("sequence")) {
    const auto& seq = j["sequence"];
    if (seq.is_string()) {
      if (seq.get<std::string>() != "pps")
        throw ConfigError("initial.sequence: the only named sequence is \"pps\"");
      init.shipped_pps = true;
    } else if (seq.is_array()) {
      for (size_t k = 0; k < seq.size(); ++k)
        init.sequence.push_back(
            parse_element(seq[k], "initial.sequence[" + std::to_string(k) + "]"));
    } else {
      throw ConfigError("initial.sequence: expected \"pps\" or an element array");
    }
  }
  return init;
}

inline EvolutionConfig parse_evolution(const json* j, const SpinSystem& s) {
  EvolutionConfig ev;
  ev.scheme = s.open_system() ? Scheme::fixed_step_rk4 : Scheme::exact_unitary;
  if (j == nullptr || j->is_null()) return ev;
  if (!j->is_object()) throw ConfigError("evolution: expected an object");
  if (j->contains("scheme")) {
    const std::string name = as_string((*j)["scheme"], "evolution.scheme");
    if (name == "exact_unitary")
      ev.scheme = Scheme::exact_unitary;
    else if (name == "fixed_step_rk4")
      ev.scheme = Scheme::fixed_step_rk4;
    else
      throw ConfigError("evolution.scheme: expected exact_unitary or fixed_step_rk4");
  }
  if (j->contains("step")) ev.step = as_number((*j)["step"], "evolution.step");
  return ev;
}

inline void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                                const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (!key.empty() && key[0] == '_') continue;  // comment keys
    bool ok = false;
    for (const std::string& k : known) ok = ok || k == key;
    if (!ok) throw ConfigError(ctx + ": unknown key '" + key + "'");
  }
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const detail::json& j, bool allow_sweep_block = false) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  std::vector<std::string> known = {"system", "drive",   "rfi",      "initial",
                                    "duration", "samples", "discord", "evolution"};
  if (allow_sweep_block) known.push_back("sweep");
  detail::reject_unknown_keys(j, known, "config");

  ScenarioConfig cfg;
  cfg.system = parse_system(detail::member(j, "config", "system"));
  cfg.drive = detail::parse_drive(detail::member(j, "config", "drive"), cfg.system.n_qubits);
  if (j.contains("rfi")) cfg.rfi = detail::parse_rfi(j["rfi"]);
  cfg.initial = detail::parse_initial(j.contains("initial") ? j["initial"] : detail::json(),
                                      cfg.system.n_qubits);
  cfg.duration = detail::as_number(detail::member(j, "config", "duration"), "duration");
  cfg.sample_count = detail::as_integer(detail::member(j, "config", "samples"), "samples");
  if (j.contains("discord")) {
    const auto& parts = j["discord"];
    if (!parts.is_array()) throw ConfigError("discord: expected an array of partition strings");
    for (const auto& p : parts)
      cfg.discord_partitions.push_back(
          parse_partition(detail::as_string(p, "discord"), cfg.system.n_qubits));
  }
  cfg.evolution =
      detail::parse_evolution(j.contains("evolution") ? &j["evolution"] : nullptr, cfg.system);
  cfg.validate();
  return cfg;
}

inline SweepConfig parse_sweep(const detail::json& j) {
  SweepConfig cfg;
  cfg.base = parse_scenario(j, true);
  if (!j.contains("sweep")) throw ConfigError("sweep: missing the sweep block");
  const auto& sw = j["sweep"];
  if (!sw.is_object()) throw ConfigError("sweep: expected an object");
  detail::reject_unknown_keys(sw, {"qubit", "values", "discord"}, "sweep");
  cfg.swept_qubit = detail::as_integer(detail::member(sw, "sweep", "qubit"), "sweep.qubit");
  cfg.values = detail::as_number_list(detail::member(sw, "sweep", "values"), "sweep.values");
  if (sw.contains("discord"))
    cfg.discord_partition = parse_partition(detail::as_string(sw["discord"], "sweep.discord"),
                                            cfg.base.system.n_qubits);
  else
    cfg.discord_partition = Partition::single_measured(2, cfg.base.system.n_qubits);
  cfg.validate();
  return cfg;
}

namespace detail {

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);  // allow // comments
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return j;
}

}  // namespace detail

inline ScenarioConfig load_scenario(const std::string& path) {
  return parse_scenario(detail::load_json_file(path));
}

inline SweepConfig load_sweep(const std::string& path) {
  return parse_sweep(detail::load_json_file(path));
}

// Accepts either a bare system object or a full config containing one, so a
// scenario file doubles as a system file for the three-spin presets.
inline SpinSystem load_system(const std::string& path) {
  detail::json j = detail::load_json_file(path);
  if (j.is_object() && j.contains("system")) return parse_system(j["system"]);
  return parse_system(j);
}

// Serialization of a scenario (used by `preset --print`); the output parses
// back into an equivalent configuration.
inline nlohmann::ordered_json scenario_to_json(const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json sys;
  sys["n"] = cfg.system.n_qubits;
  sys["offsets"] = cfg.system.offsets;
  std::vector<std::vector<double>> rows;
  for (int r = 0; r < cfg.system.n_qubits; ++r) {
    std::vector<double> row;
    for (int c = 0; c < cfg.system.n_qubits; ++c) row.push_back(cfg.system.couplings(r, c));
    rows.push_back(std::move(row));
  }
  sys["couplings"] = rows;
  if (!cfg.system.t1.empty()) sys["t1"] = cfg.system.t1;
  if (!cfg.system.t2.empty()) sys["t2"] = cfg.system.t2;
  if (!cfg.system.purity.empty()) sys["eps"] = cfg.system.purity;
  j["system"] = sys;

  nlohmann::ordered_json drive;
  drive["amplitudes"] = cfg.drive.amplitudes;
  drive["phases"] = cfg.drive.phases;
  j["drive"] = drive;

  if (cfg.rfi.samples.size() > 1) {
    nlohmann::ordered_json rfi;
    std::vector<double> scales, weights;
    for (const auto& [scale, weight] : cfg.rfi.samples) {
      scales.push_back(scale);
      weights.push_back(weight);
    }
    rfi["scales"] = scales;
    rfi["weights"] = weights;
    j["rfi"] = rfi;
  }

  nlohmann::ordered_json init;
  if (cfg.initial.shipped_pps) {
    init["state"] = "thermal";
    init["sequence"] = "pps";
  } else {
    init["state"] = cfg.initial.state;
    init["eps"] = cfg.initial.eps;
  }
  j["initial"] = init;

  j["duration"] = cfg.duration;
  j["samples"] = cfg.sample_count;
  if (!cfg.discord_partitions.empty()) {
    std::vector<std::string> parts;
    for (const Partition& p : cfg.discord_partitions) parts.push_back(p.label());
    j["discord"] = parts;
  }
  nlohmann::ordered_json ev;
  ev["scheme"] = cfg.evolution.scheme == Scheme::exact_unitary ? "exact_unitary"
                                                               : "fixed_step_rk4";
  if (cfg.evolution.step > 0.0) ev["step"] = cfg.evolution.step;
  j["evolution"] = ev;
  return j;
}

}  // namespace spinsim
