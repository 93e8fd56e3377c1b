#pragma once

#include <spinsim/discord.hpp>
#include <spinsim/dynamics.hpp>
#include <spinsim/model.hpp>
#include <spinsim/nmrtools.hpp>
#include <spinsim/qops.hpp>
#include <spinsim/states.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinsim {

// Configuration and validation problems; the CLI maps this to exit code 2,
// while plain runtime errors map to 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// How the initial density matrix is built: a named state (optionally made
// pseudopure), the thermal state, or a pulse sequence applied on top.
struct InitialSpec {
  std::string state = "";        // basis label, "plus", "minus", "w1".."w3", "thermal"
  double eps = 1.0;              // pseudopure weight for named pure states
  bool shipped_pps = false;      // run the shipped spatial-averaging sequence
  std::vector<PulseElement> sequence;  // custom elements, applied after `state`
};

struct ScenarioConfig {
  SpinSystem system;
  DriveConfig drive;
  RfiDistribution rfi = RfiDistribution::single();
  InitialSpec initial;
  double duration = 0.0;
  int sample_count = 0;
  std::vector<Partition> discord_partitions;
  EvolutionConfig evolution;

  void validate() const {
    try {
      system.validate();
      drive.validate(system.n_qubits);
      rfi.validate();
      EvolutionConfig ev = evolution;  // sample times are filled per run
      ev.sample_times = {0.0};
      ev.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (!(duration > 0.0)) throw ConfigError("duration: must be positive");
    if (sample_count < 2) throw ConfigError("samples: need at least 2");
    for (const Partition& p : discord_partitions) {
      try {
        p.validate(system.n_qubits);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("discord: ") + e.what());
      }
    }
    const bool open = system.open_system();
    if (open && evolution.scheme != Scheme::fixed_step_rk4)
      throw ConfigError("evolution.scheme: open systems require fixed_step_rk4");
    if (!open && evolution.scheme == Scheme::fixed_step_rk4)
      throw ConfigError("evolution.scheme: fixed_step_rk4 requires t1/t2 on the system");
    if (!(initial.eps >= 0.0 && initial.eps <= 1.0))
      throw ConfigError("initial.eps: must lie in [0, 1]");
  }
};

struct SweepConfig {
  ScenarioConfig base;
  int swept_qubit = 2;          // 1-based index of the re-driven qubit
  std::vector<double> values;   // amplitudes in Hz
  Partition discord_partition;

  void validate() const {
    base.validate();
    if (swept_qubit < 1 || swept_qubit > base.system.n_qubits)
      throw ConfigError("sweep.qubit: out of range");
    if (values.empty()) throw ConfigError("sweep.values: must be non-empty");
    for (double v : values)
      if (!(v > 0.0)) throw ConfigError("sweep.values: amplitudes must be positive");
    try {
      discord_partition.validate(base.system.n_qubits);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("sweep.discord: ") + e.what());
    }
  }
};

struct SweepTable {
  std::vector<double> values;                   // swept amplitude per row, Hz
  std::vector<double> t_crest;                  // first-crest time per row, s
  std::vector<std::vector<double>> populations; // basis-ordered populations at the crest
  std::vector<double> discord_values;           // nats
  std::string partition_label;
};

namespace detail {

inline Matrix build_initial_state_impl(const ScenarioConfig& cfg) {
  const int n = cfg.system.n_qubits;
  Matrix rho;
  const std::string& name = cfg.initial.state;
  if (cfg.initial.shipped_pps) {
    const Matrix thermal = thermal_state(cfg.system);
    rho = n == 2 ? run_sequence(pps_sequence_2q(cfg.system), thermal)
                 : run_sequence(pps_sequence_3q(cfg.system), thermal);
  } else if (name == "thermal" || (name.empty() && !cfg.initial.sequence.empty())) {
    rho = thermal_state(cfg.system);
  } else {
    Vector psi;
    if (name == "plus")
      psi = plus_minus_states().first;
    else if (name == "minus")
      psi = plus_minus_states().second;
    else if (name == "w1" || name == "w2" || name == "w3")
      psi = w_basis()[static_cast<size_t>(name[1] - '1')];
    else
      psi = basis_state(n, basis_index(name));
    if (psi.size() != (1L << n))
      throw ConfigError("initial.state: dimension does not match the system");
    rho = pseudopure(psi, cfg.initial.eps);
  }
  if (!cfg.initial.sequence.empty()) {
    PulseSequence seq;
    seq.system = cfg.system;
    seq.elements = cfg.initial.sequence;
    rho = run_sequence(seq, rho);
  }
  return rho;
}

inline Matrix build_initial_state(const ScenarioConfig& cfg) {
  try {
    return build_initial_state_impl(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("initial: ") + e.what());
  }
}

// Evolve with the configured scheme and RFI ensemble at explicit times.
inline Trajectory run_at_times(const ScenarioConfig& cfg, const Matrix& rho0,
                               std::vector<double> times) {
  EvolutionConfig ev = cfg.evolution;
  ev.sample_times = std::move(times);
  const bool open = cfg.system.open_system();
  return ensemble_average(cfg.rfi, cfg.drive, [&](const DriveConfig& member) {
    if (open) return evolve_open(cfg.system, member, rho0, ev);
    return evolve_closed(build_nmr_hamiltonian(cfg.system, member), rho0, ev);
  });
}

}  // namespace detail

inline Trajectory run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const Matrix rho0 = detail::build_initial_state(cfg);
  Trajectory tr = detail::run_at_times(
      cfg, rho0, EvolutionConfig::uniform_times(cfg.duration, cfg.sample_count));
  for (const Partition& p : cfg.discord_partitions) {
    std::vector<double> vals(tr.states.size());
    detail::parallel_for(tr.states.size(),
                         [&](std::size_t k) { vals[k] = discord(tr.states[k], p).value; });
    tr.discord.push_back(std::move(vals));
    tr.discord_labels.push_back(p.label());
  }
  return tr;
}

namespace detail {

// First local maximum of the P_ge + P_eg trace, sharpened by quadratic
// interpolation through the discrete peak and its neighbours.
inline double first_crest_time(const std::vector<double>& t, const std::vector<double>& s) {
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    if (s[k] >= s[k - 1] && s[k] >= s[k + 1] && s[k] > s.front() + 1e-9) {
      const double denom = s[k - 1] - 2.0 * s[k] + s[k + 1];
      if (std::abs(denom) < 1e-300) return t[k];
      const double dt = t[k] - t[k - 1];
      double shift = 0.5 * dt * (s[k - 1] - s[k + 1]) / denom;
      shift = std::clamp(shift, -dt, dt);
      return t[k] + shift;
    }
  }
  throw std::runtime_error("run_sweep: crest not found within duration");
}

}  // namespace detail

inline SweepTable run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  if (cfg.base.system.n_qubits != 2)
    throw ConfigError("sweep: only two-qubit registers are supported");
  SweepTable table;
  table.partition_label = cfg.discord_partition.label();
  const std::size_t n_points = cfg.values.size();
  table.values = cfg.values;
  table.t_crest.assign(n_points, 0.0);
  table.populations.assign(n_points, {});
  table.discord_values.assign(n_points, 0.0);

  detail::parallel_for(n_points, [&](std::size_t k) {
    ScenarioConfig point = cfg.base;
    point.drive.amplitudes[static_cast<size_t>(cfg.swept_qubit - 1)] = cfg.values[k];
    point.discord_partitions.clear();
    const Matrix rho0 = detail::build_initial_state(point);
    Trajectory scan = detail::run_at_times(
        point, rho0, EvolutionConfig::uniform_times(point.duration, point.sample_count));
    std::vector<double> signal(scan.times.size());
    const int ge = basis_index("ge"), eg = basis_index("eg");
    for (std::size_t i = 0; i < signal.size(); ++i)
      signal[i] = scan.populations[i][static_cast<size_t>(ge)] +
                  scan.populations[i][static_cast<size_t>(eg)];
    const double t_star = detail::first_crest_time(scan.times, signal);
    Trajectory at_crest = detail::run_at_times(point, rho0, {t_star});
    table.t_crest[k] = t_star;
    table.populations[k] = at_crest.populations.front();
    table.discord_values[k] = discord(at_crest.states.front(), cfg.discord_partition).value;
  });
  return table;
}

// ---------------------------------------------------------------------------
// Presets: the experiment settings of the reference scenarios. Two-spin ones
// are self-contained; three-spin ones need externally supplied couplings.

namespace detail {

inline SpinSystem uniform_system(int n, double j, double offset) {
  SpinSystem s;
  s.n_qubits = n;
  s.offsets.assign(static_cast<size_t>(n), offset);
  s.couplings = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (i != k) s.couplings(i, k) = j;
  return s;
}

inline void apply_blockade_offsets(SpinSystem& s) {
  for (int i = 0; i < s.n_qubits; ++i) {
    double sum = 0.0;
    for (int k = 0; k < s.n_qubits; ++k) sum += s.couplings(i, k);
    s.offsets[static_cast<size_t>(i)] = 0.5 * sum;
  }
}

inline ScenarioConfig scenario_skeleton(SpinSystem sys, std::vector<double> amplitudes,
                                        double duration, int samples) {
  ScenarioConfig cfg;
  cfg.system = std::move(sys);
  cfg.drive.amplitudes = std::move(amplitudes);
  cfg.drive.phases.assign(cfg.drive.amplitudes.size(), 0.0);
  cfg.initial.state = std::string(static_cast<size_t>(cfg.system.n_qubits), 'g');
  cfg.duration = duration;
  cfg.sample_count = samples;
  return cfg;
}

inline bool is_three_spin_preset(const std::string& name) {
  return name == "blockade3q" || name == "freeze3q_q23" || name == "freeze3q_q13" ||
         name == "freeze3q_q3";
}

}  // namespace detail

inline ScenarioConfig preset(const std::string& name, const SpinSystem* three_spin = nullptr) {
  const double nu = 217.0;  // two-spin drive amplitude, Hz
  const double j2 = 868.0;  // two-spin coupling, Hz

  if (name == "rabi2q") {
    return detail::scenario_skeleton(detail::uniform_system(2, 0.0, 0.0), {nu, nu}, 5.0 / nu,
                                     201);
  }
  if (name == "rabi3q") {
    return detail::scenario_skeleton(detail::uniform_system(3, 0.0, 0.0), {10.0, 10.0, 10.0},
                                     0.5, 201);
  }
  if (name == "blockade2q" || name == "freeze2q_q2" || name == "freeze2q_q1" ||
      name == "sweep_fig4") {
    SpinSystem sys = detail::uniform_system(2, j2, 0.0);
    detail::apply_blockade_offsets(sys);
    ScenarioConfig cfg;
    if (name == "freeze2q_q2")
      cfg = detail::scenario_skeleton(std::move(sys), {nu, nu / 4.0}, 0.012, 201);
    else if (name == "freeze2q_q1")
      cfg = detail::scenario_skeleton(std::move(sys), {nu / 4.0, nu}, 0.012, 201);
    else if (name == "sweep_fig4")
      cfg = detail::scenario_skeleton(std::move(sys), {nu, nu}, 0.008, 801);
    else
      cfg = detail::scenario_skeleton(std::move(sys), {nu, nu}, 5.0 / (std::sqrt(2.0) * nu),
                                      201);
    if (name != "sweep_fig4")
      cfg.discord_partitions = {Partition::single_measured(1, 2)};
    return cfg;
  }
  if (detail::is_three_spin_preset(name)) {
    if (three_spin == nullptr)
      throw ConfigError("preset " + name + ": three-qubit couplings required, supply a system");
    SpinSystem sys = *three_spin;
    if (sys.n_qubits != 3)
      throw ConfigError("preset " + name + ": supplied system must have three qubits");
    detail::apply_blockade_offsets(sys);
    std::vector<double> amps;
    double duration = 0.040;
    if (name == "blockade3q") {
      amps = {10.0, 10.0, 10.0};
      duration = 5.0 / (std::sqrt(3.0) * 10.0);
    } else if (name == "freeze3q_q23") {
      amps = {50.0, 10.0, 10.0};
    } else if (name == "freeze3q_q13") {
      amps = {10.0, 50.0, 10.0};
    } else {
      amps = {50.0, 50.0, 10.0};
    }
    ScenarioConfig cfg = detail::scenario_skeleton(std::move(sys), std::move(amps), duration, 201);
    cfg.discord_partitions = {Partition::single_measured(1, 3)};
    return cfg;
  }
  throw ConfigError("preset: unknown name '" + name + "'");
}

inline SweepConfig sweep_preset(const std::string& name) {
  if (name != "sweep_fig4") throw ConfigError("sweep preset: unknown name '" + name + "'");
  SweepConfig cfg;
  cfg.base = preset("sweep_fig4");
  cfg.swept_qubit = 2;
  const double hi = 217.0, lo = 54.2;
  for (int k = 0; k < 13; ++k) cfg.values.push_back(hi + (lo - hi) * k / 12.0);
  cfg.discord_partition = Partition::single_measured(2, 2);
  return cfg;
}

// ---------------------------------------------------------------------------
// Emission

enum class OutputFormat { csv, json };

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string> trajectory_columns(const Trajectory& tr, int n) {
  std::vector<std::string> cols = {"t_ms"};
  for (int b = 0; b < (1 << n); ++b) cols.push_back("pop_" + basis_label(b, n));
  for (const std::string& lbl : tr.discord_labels) cols.push_back("discord_" + lbl);
  return cols;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot open '" + path + "' for writing");
  out << body;
  if (!out) throw std::runtime_error("emit: write to '" + path + "' failed");
}

}  // namespace detail

inline void emit(const Trajectory& tr, OutputFormat format, const std::string& path) {
  if (tr.populations.empty()) throw std::runtime_error("emit: empty trajectory");
  const int n = detail::qubit_count_of(static_cast<Eigen::Index>(tr.populations.front().size()));
  const std::vector<std::string> cols = detail::trajectory_columns(tr, n);
  const std::size_t rows = tr.times.size();

  auto cell = [&](std::size_t col, std::size_t row) {
    if (col == 0) return 1e3 * tr.times[row];
    const std::size_t nb = tr.populations.front().size();
    if (col <= nb) return tr.populations[row][col - 1];
    return tr.discord[col - nb - 1][row];
  };

  std::string body;
  if (format == OutputFormat::csv) {
    for (std::size_t c = 0; c < cols.size(); ++c) body += (c ? "," : "") + cols[c];
    body += '\n';
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) body += ',';
        body += detail::format_double(cell(c, r));
      }
      body += '\n';
    }
  } else {
    body += "{\n";
    for (std::size_t c = 0; c < cols.size(); ++c) {
      body += "  \"" + cols[c] + "\": [";
      for (std::size_t r = 0; r < rows; ++r)
        body += (r ? "," : "") + detail::format_double(cell(c, r));
      body += c + 1 < cols.size() ? "],\n" : "]\n";
    }
    body += "}\n";
  }
  detail::write_text_file(path, body);
}

inline void emit(const SweepTable& table, OutputFormat format, const std::string& path) {
  if (table.populations.empty() || table.populations.front().empty())
    throw std::runtime_error("emit: empty sweep table");
  const int n =
      detail::qubit_count_of(static_cast<Eigen::Index>(table.populations.front().size()));
  std::vector<std::string> cols = {"nu_rf_hz", "t_crest_ms"};
  for (int b = 0; b < (1 << n); ++b) cols.push_back("pop_" + basis_label(b, n));
  cols.push_back("discord_" + table.partition_label);

  auto cell = [&](std::size_t col, std::size_t row) {
    if (col == 0) return table.values[row];
    if (col == 1) return 1e3 * table.t_crest[row];
    const std::size_t nb = table.populations.front().size();
    if (col <= nb + 1) return table.populations[row][col - 2];
    return table.discord_values[row];
  };

  std::string body;
  if (format == OutputFormat::csv) {
    for (std::size_t c = 0; c < cols.size(); ++c) body += (c ? "," : "") + cols[c];
    body += '\n';
    for (std::size_t r = 0; r < table.values.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) body += ',';
        body += detail::format_double(cell(c, r));
      }
      body += '\n';
    }
  } else {
    body += "{\n";
    for (std::size_t c = 0; c < cols.size(); ++c) {
      body += "  \"" + cols[c] + "\": [";
      for (std::size_t r = 0; r < table.values.size(); ++r)
        body += (r ? "," : "") + detail::format_double(cell(c, r));
      body += c + 1 < cols.size() ? "],\n" : "]\n";
    }
    body += "}\n";
  }
  detail::write_text_file(path, body);
}

}  // namespace spinsim
